//! Command vocabulary and the glyph table shipped in `data/symbols.tsv`.

use std::collections::BTreeMap;
use std::sync::LazyLock;

const TABLE_SOURCE: &str = include_str!("../data/symbols.tsv");

pub struct SymbolTable {
    pub version: u32,
    glyphs: BTreeMap<String, char>,
}

impl SymbolTable {
    /// Parses `name<TAB>hex-codepoint` lines; `#` starts a comment and a
    /// `# version: N` comment sets the table version.
    pub fn parse(source: &str) -> Result<Self, String> {
        let mut version = 0;
        let mut glyphs = BTreeMap::new();
        for (i, line) in source.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("version:") {
                    version = v.trim().parse().map_err(|_| format!("line {}: bad version", i + 1))?;
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (name, cp) =
                line.split_once('\t').ok_or_else(|| format!("line {}: expected name<TAB>codepoint", i + 1))?;
            let glyph = u32::from_str_radix(cp.trim(), 16)
                .ok()
                .and_then(char::from_u32)
                .ok_or_else(|| format!("line {}: bad codepoint {cp:?}", i + 1))?;
            if !name.chars().all(|c| c.is_ascii_alphabetic()) || name.is_empty() {
                return Err(format!("line {}: bad command name {name:?}", i + 1));
            }
            if glyphs.insert(name.to_owned(), glyph).is_some() {
                return Err(format!("line {}: duplicate {name}", i + 1));
            }
        }
        Ok(Self { version, glyphs })
    }

    pub fn glyph(&self, name: &str) -> Option<char> {
        self.glyphs.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.glyphs.keys().map(String::as_str)
    }
}

pub static SYMBOLS: LazyLock<SymbolTable> =
    LazyLock::new(|| SymbolTable::parse(TABLE_SOURCE).expect("bundled symbol table is valid"));

pub const FUNCTIONS: [&str; 5] = ["exp", "ln", "log", "sin", "cos"];

pub const OPERATORS: [&str; 6] = ["cdot", "times", "pm", "leq", "geq", "rightarrow"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Fraction,
    Sqrt,
    Function,
    Symbol,
}

pub fn command_kind(name: &str) -> Option<CommandKind> {
    match name {
        "frac" => Some(CommandKind::Fraction),
        "sqrt" => Some(CommandKind::Sqrt),
        _ if FUNCTIONS.contains(&name) => Some(CommandKind::Function),
        _ if SYMBOLS.glyph(name).is_some() => Some(CommandKind::Symbol),
        _ => None,
    }
}

pub fn is_operator(name: &str) -> bool {
    OPERATORS.contains(&name)
}
