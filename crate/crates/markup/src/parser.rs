use crate::ast::{Document, MarkupNode};
use crate::error::{ParseError, Position};
use crate::symbols::{command_kind, CommandKind};
use crate::token::{tokenize, Token, TokenKind};

/// Deepest allowed nesting of groups and command arguments.
pub const MAX_DEPTH: usize = 64;

/// Parses markup source into paragraphs of text and inline math.
///
/// Paragraphs are separated by blank lines. `$...$` is inline math. In
/// math, `^` and `_` bind the preceding atom to a single following atom or
/// braced group. `\frac` takes two arguments, `\sqrt` and the function
/// commands take one.
pub fn parse(source: &str) -> Result<Document, ParseError> {
    let tokens = tokenize(source)?;
    let end = end_position(source);
    Parser { tokens, idx: 0, end, depth: 0 }.document()
}

fn end_position(source: &str) -> Position {
    let mut pos = Position::START;
    for c in source.chars() {
        if c == '\n' {
            pos.line += 1;
            pos.column = 1;
        } else {
            pos.column += 1;
        }
    }
    pos
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Text,
    Math,
}

struct Parser {
    tokens: Vec<Token>,
    idx: usize,
    end: Position,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.idx)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.idx).cloned();
        self.idx += 1;
        t
    }

    fn error_here(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::new(t.position, expected, t.describe()),
            None => ParseError::new(self.end, expected, "end of input"),
        }
    }

    fn skip_blank(&mut self) {
        while self.peek().is_some_and(Token::is_blank) {
            self.idx += 1;
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error_here(&format!("at most {MAX_DEPTH} levels of nesting")));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn document(mut self) -> Result<Document, ParseError> {
        let mut paragraphs = Vec::new();
        let mut current: Vec<MarkupNode> = Vec::new();
        while let Some(tok) = self.peek() {
            if tok.kind == TokenKind::Text {
                let tok = self.next().unwrap();
                let mut pieces = split_paragraphs(&tok.lexeme).into_iter();
                if let Some(first) = pieces.next() {
                    push_text(&mut current, first);
                }
                for piece in pieces {
                    flush_paragraph(&mut paragraphs, &mut current);
                    push_text(&mut current, piece);
                }
            } else if tok.kind == TokenKind::BraceClose {
                return Err(self.error_here("text, \"$\" or \"{\""));
            } else {
                let node = self.text_item()?;
                current.push(node);
            }
        }
        flush_paragraph(&mut paragraphs, &mut current);
        Ok(Document { paragraphs })
    }

    /// One non-text item in text mode: math, a group or a command.
    fn text_item(&mut self) -> Result<MarkupNode, ParseError> {
        let tok = self.peek().expect("caller checked").clone();
        match tok.kind {
            TokenKind::MathDelim => self.math(),
            TokenKind::BraceOpen => Ok(MarkupNode::Group(self.braced(Mode::Text)?)),
            TokenKind::Command => self.command(),
            TokenKind::Text => {
                self.idx += 1;
                Ok(MarkupNode::TextRun(tok.lexeme))
            }
            _ => Err(self.error_here("text")),
        }
    }

    fn math(&mut self) -> Result<MarkupNode, ParseError> {
        self.next();
        self.enter()?;
        let children = self.math_list(TokenKind::MathDelim, "\"$\"")?;
        self.leave();
        Ok(MarkupNode::Math(children))
    }

    /// Parses math atoms until `close`, consuming it.
    fn math_list(&mut self, close: TokenKind, close_name: &str) -> Result<Vec<MarkupNode>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_blank();
            match self.peek() {
                None => return Err(self.error_here(close_name)),
                Some(t) if t.kind == close => {
                    self.next();
                    return Ok(out);
                }
                Some(t) if t.kind == TokenKind::MathDelim || t.kind == TokenKind::BraceClose => {
                    return Err(self.error_here(close_name));
                }
                Some(_) => {
                    let atom = self.scripted_atom()?;
                    out.push(atom);
                }
            }
        }
    }

    /// An atom followed by any number of `^x` / `_x` scripts.
    fn scripted_atom(&mut self) -> Result<MarkupNode, ParseError> {
        let mut base = self.atom()?;
        loop {
            self.skip_blank();
            let kind = match self.peek() {
                Some(t) if t.kind == TokenKind::Superscript || t.kind == TokenKind::Subscript => t.kind,
                _ => return Ok(base),
            };
            self.next();
            let script = self.argument(Mode::Math)?;
            base = if kind == TokenKind::Superscript {
                MarkupNode::Sup(Box::new(base), Box::new(script))
            } else {
                MarkupNode::Sub(Box::new(base), Box::new(script))
            };
        }
    }

    fn atom(&mut self) -> Result<MarkupNode, ParseError> {
        self.skip_blank();
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error_here("math atom"));
        };
        match tok.kind {
            TokenKind::Text => {
                self.next();
                Ok(MarkupNode::TextRun(tok.lexeme))
            }
            TokenKind::Symbol => {
                self.next();
                Ok(MarkupNode::Symbol(tok.lexeme))
            }
            TokenKind::Command => self.command(),
            TokenKind::BraceOpen => Ok(MarkupNode::Group(self.braced(Mode::Math)?)),
            TokenKind::Superscript | TokenKind::Subscript => Err(self.error_here("a base before the script")),
            TokenKind::MathDelim | TokenKind::BraceClose => Err(self.error_here("math atom")),
        }
    }

    /// A command argument: one atom, or a braced group unwrapped when it
    /// holds exactly one node.
    fn argument(&mut self, mode: Mode) -> Result<MarkupNode, ParseError> {
        self.skip_blank();
        match self.peek() {
            Some(t) if t.kind == TokenKind::BraceOpen => {
                let mut children = self.braced(mode)?;
                if children.len() == 1 {
                    Ok(children.pop().unwrap())
                } else {
                    Ok(MarkupNode::Group(children))
                }
            }
            _ if mode == Mode::Math => self.atom(),
            _ => Err(self.error_here("\"{\"")),
        }
    }

    /// `{ ... }` in the given mode; returns the children.
    fn braced(&mut self, mode: Mode) -> Result<Vec<MarkupNode>, ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::BraceOpen => {
                self.next();
            }
            _ => return Err(self.error_here("\"{\"")),
        }
        self.enter()?;
        let children = match mode {
            Mode::Math => self.math_list(TokenKind::BraceClose, "\"}\"")?,
            Mode::Text => {
                let mut out = Vec::new();
                loop {
                    match self.peek() {
                        None => return Err(self.error_here("\"}\"")),
                        Some(t) if t.kind == TokenKind::BraceClose => {
                            self.next();
                            break;
                        }
                        Some(_) => out.push(self.text_item()?),
                    }
                }
                out
            }
        };
        self.leave();
        Ok(children)
    }

    fn command(&mut self) -> Result<MarkupNode, ParseError> {
        let tok = self.next().expect("caller checked");
        let name = tok.command_name().expect("command token").to_owned();
        self.enter()?;
        // Arguments of structural commands are always math.
        let node = match command_kind(&name).expect("tokenizer admits known commands only") {
            CommandKind::Symbol => MarkupNode::Symbol(name),
            CommandKind::Fraction => {
                let num = self.required_group()?;
                let den = self.required_group()?;
                MarkupNode::Fraction(Box::new(num), Box::new(den))
            }
            CommandKind::Sqrt => MarkupNode::Sqrt(Box::new(self.required_group()?)),
            CommandKind::Function => {
                let arg = self.argument(Mode::Math)?;
                MarkupNode::Function(name, Box::new(arg))
            }
        };
        self.leave();
        Ok(node)
    }

    fn required_group(&mut self) -> Result<MarkupNode, ParseError> {
        self.skip_blank();
        match self.peek() {
            Some(t) if t.kind == TokenKind::BraceOpen => self.argument(Mode::Math),
            _ => Err(self.error_here("\"{\"")),
        }
    }
}

/// Splits a text run on blank lines.
fn split_paragraphs(text: &str) -> Vec<&str> {
    let mut pieces = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\n' {
            // Look for another newline with only spaces/tabs/CR between.
            let mut j = i + 1;
            let mut blank_end = None;
            while j < bytes.len() && matches!(bytes[j], b' ' | b'\t' | b'\r' | b'\n') {
                if bytes[j] == b'\n' {
                    blank_end = Some(j + 1);
                }
                j += 1;
            }
            if let Some(e) = blank_end {
                let mut cut = i;
                if cut > start && bytes[cut - 1] == b'\r' {
                    cut -= 1;
                }
                pieces.push(&text[start..cut]);
                start = e;
                i = e;
                continue;
            }
        }
        i += 1;
    }
    pieces.push(&text[start..]);
    pieces
}

fn push_text(current: &mut Vec<MarkupNode>, text: &str) {
    if !text.is_empty() {
        current.push(MarkupNode::TextRun(text.to_owned()));
    }
}

fn flush_paragraph(paragraphs: &mut Vec<MarkupNode>, current: &mut Vec<MarkupNode>) {
    let children = std::mem::take(current);
    let blank = children.iter().all(|n| matches!(n, MarkupNode::TextRun(t) if t.trim().is_empty()));
    if !blank {
        paragraphs.push(MarkupNode::Paragraph(children));
    }
}
