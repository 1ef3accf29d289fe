use std::fmt::Write;

use crate::ast::{Document, MarkupNode};
use crate::symbols::{is_operator, SYMBOLS};

const MATHML_NS: &str = "http://www.w3.org/1998/Math/MathML";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// HTML paragraphs with inline MathML.
    HtmlMathml,
    /// Structure stripped, for search indexing and previews.
    PlainText,
}

pub fn render(node: &MarkupNode, target: Target) -> String {
    let mut out = String::new();
    match target {
        Target::HtmlMathml => html(node, Ctx::Text, &mut out),
        Target::PlainText => plain(node, &mut out),
    }
    out
}

pub fn render_document(doc: &Document, target: Target) -> String {
    let sep = match target {
        Target::HtmlMathml => "\n",
        Target::PlainText => "\n\n",
    };
    doc.paragraphs.iter().map(|p| render(p, target)).collect::<Vec<_>>().join(sep)
}

impl Document {
    pub fn render(&self, target: Target) -> String {
        render_document(self, target)
    }
}

pub fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    escape_into(s, &mut out);
    out
}

fn escape_into(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
}

fn glyph(name: &str) -> String {
    match SYMBOLS.glyph(name) {
        Some(c) => c.to_string(),
        None => name.to_owned(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Text,
    Math,
}

fn html(node: &MarkupNode, ctx: Ctx, out: &mut String) {
    use MarkupNode::*;
    match (node, ctx) {
        (Paragraph(children), _) => {
            out.push_str("<p>");
            for c in children {
                html(c, Ctx::Text, out);
            }
            out.push_str("</p>");
        }
        (Math(children), _) => {
            write!(out, "<math xmlns=\"{MATHML_NS}\"><mrow>").unwrap();
            for c in children {
                html(c, Ctx::Math, out);
            }
            out.push_str("</mrow></math>");
        }
        (TextRun(t), Ctx::Text) => escape_into(t, out),
        (Group(children), Ctx::Text) => {
            out.push_str("<span class=\"group\">");
            for c in children {
                html(c, Ctx::Text, out);
            }
            out.push_str("</span>");
        }
        (Symbol(name), Ctx::Text) => escape_into(&glyph(name), out),
        // Math-only constructs written outside `$...$` get their own math element.
        (_, Ctx::Text) => {
            write!(out, "<math xmlns=\"{MATHML_NS}\"><mrow>").unwrap();
            html(node, Ctx::Math, out);
            out.push_str("</mrow></math>");
        }
        (TextRun(t), Ctx::Math) => {
            let tag = if t.chars().next().is_some_and(|c| c.is_ascii_digit() || c == '.') { "mn" } else { "mi" };
            write!(out, "<{tag}>").unwrap();
            escape_into(t, out);
            write!(out, "</{tag}>").unwrap();
        }
        (Symbol(name), Ctx::Math) => {
            let is_letter = name.chars().all(char::is_alphabetic) && !is_operator(name);
            let tag = if is_letter { "mi" } else { "mo" };
            write!(out, "<{tag}>").unwrap();
            escape_into(&glyph(name), out);
            write!(out, "</{tag}>").unwrap();
        }
        (Group(children), Ctx::Math) => {
            out.push_str("<mrow>");
            for c in children {
                html(c, Ctx::Math, out);
            }
            out.push_str("</mrow>");
        }
        (Fraction(num, den), Ctx::Math) => {
            out.push_str("<mfrac>");
            mrow(num, out);
            mrow(den, out);
            out.push_str("</mfrac>");
        }
        (Sqrt(child), Ctx::Math) => {
            out.push_str("<msqrt>");
            mrow(child, out);
            out.push_str("</msqrt>");
        }
        (Sup(base, exp), Ctx::Math) => {
            out.push_str("<msup>");
            mrow(base, out);
            mrow(exp, out);
            out.push_str("</msup>");
        }
        (Sub(base, idx), Ctx::Math) => {
            out.push_str("<msub>");
            mrow(base, out);
            mrow(idx, out);
            out.push_str("</msub>");
        }
        (Function(name, arg), Ctx::Math) => {
            out.push_str("<mrow><mi>");
            escape_into(name, out);
            out.push_str("</mi><mo>&#x2061;</mo>");
            mrow(arg, out);
            out.push_str("</mrow>");
        }
    }
}

fn mrow(node: &MarkupNode, out: &mut String) {
    out.push_str("<mrow>");
    html(node, Ctx::Math, out);
    out.push_str("</mrow>");
}

fn plain(node: &MarkupNode, out: &mut String) {
    use MarkupNode::*;
    match node {
        TextRun(t) => out.push_str(t),
        Symbol(name) => out.push_str(&glyph(name)),
        Paragraph(children) | Math(children) | Group(children) => {
            for c in children {
                plain(c, out);
            }
        }
        Fraction(num, den) => {
            plain_operand(num, out);
            out.push('/');
            plain_operand(den, out);
        }
        Sqrt(child) => {
            out.push_str("√(");
            plain(child, out);
            out.push(')');
        }
        Sup(base, exp) => {
            plain_operand(base, out);
            out.push('^');
            plain_operand(exp, out);
        }
        Sub(base, idx) => {
            plain_operand(base, out);
            out.push('_');
            plain_operand(idx, out);
        }
        Function(name, arg) => {
            out.push_str(name);
            if is_simple(arg) {
                out.push(' ');
                plain(arg, out);
            } else {
                out.push('(');
                plain(arg, out);
                out.push(')');
            }
        }
    }
}

fn is_simple(node: &MarkupNode) -> bool {
    matches!(node, MarkupNode::TextRun(_) | MarkupNode::Symbol(_))
}

fn plain_operand(node: &MarkupNode, out: &mut String) {
    if is_simple(node) {
        plain(node, out);
    } else {
        out.push('(');
        plain(node, out);
        out.push(')');
    }
}
