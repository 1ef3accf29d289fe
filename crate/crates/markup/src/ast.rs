use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "node", content = "value", rename_all = "snake_case")]
pub enum MarkupNode {
    TextRun(String),
    Paragraph(Vec<MarkupNode>),
    Math(Vec<MarkupNode>),
    Fraction(Box<MarkupNode>, Box<MarkupNode>),
    Sqrt(Box<MarkupNode>),
    Sup(Box<MarkupNode>, Box<MarkupNode>),
    Sub(Box<MarkupNode>, Box<MarkupNode>),
    /// A command glyph (`lambda`) or a literal math symbol (`+`).
    Symbol(String),
    Group(Vec<MarkupNode>),
    Function(String, Box<MarkupNode>),
}

impl MarkupNode {
    pub fn text(s: impl Into<String>) -> Self {
        MarkupNode::TextRun(s.into())
    }

    pub fn symbol(s: impl Into<String>) -> Self {
        MarkupNode::Symbol(s.into())
    }

    pub fn children(&self) -> Vec<&MarkupNode> {
        match self {
            MarkupNode::TextRun(_) | MarkupNode::Symbol(_) => vec![],
            MarkupNode::Paragraph(c) | MarkupNode::Math(c) | MarkupNode::Group(c) => c.iter().collect(),
            MarkupNode::Fraction(a, b) | MarkupNode::Sup(a, b) | MarkupNode::Sub(a, b) => {
                vec![a, b]
            }
            MarkupNode::Sqrt(a) | MarkupNode::Function(_, a) => vec![a],
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }
}

/// Parsed source: a sequence of paragraphs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Document {
    pub paragraphs: Vec<MarkupNode>,
}
