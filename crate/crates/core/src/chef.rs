//! Chef recipe parser: a hand-rolled tokenizer that extracts VARIABLE,
//! PROPERTY, ATTRIBUTE, RESOURCE, CASE_STMT, and COMMENT tokens from Ruby
//! recipe code without executing it.
//!
//! The scanner runs in two phases. Phase one walks the source once, tracking
//! single/double quotes, `#{...}` interpolation, and heredocs; it collects
//! comments and string literals and produces a masked copy of each line in
//! which every literal is replaced by a placeholder character. Phase two
//! analyzes the masked lines: it maintains a block stack (`do`/`end`,
//! `case`/`end`, control keywords) and matches assignment, resource, and
//! property shapes.
//!
//! Only literal values become tokens: interpolated fragments are replaced by
//! [`INTERPOLATION_PLACEHOLDER`], and a literal that is entirely one
//! interpolation collapses to the empty string. Percent literals (`%w(...)`)
//! and regex literals are not interpreted.

use std::path::Path;

use crate::model::{Dialect, ParseStatus, ParsedScript, Token, TokenKind, TokenStream};

/// Replacement for one `#{...}` interpolation hole inside a string literal.
pub const INTERPOLATION_PLACEHOLDER: &str = "⟦·⟧";

/// Marks the position of a string literal in a masked line.
const MASK: char = '\u{FFFC}';

/// Parse one recipe or attribute file.
///
/// Unterminated strings, unterminated heredocs, and unbalanced blocks mark
/// the script malformed; the stream then carries only the comment tokens
/// collected up to that point.
pub fn parse_chef(source: &str, script: &Path) -> ParsedScript {
    let loc = source.lines().count();
    let scan = raw_scan(source);
    let mut error = scan.error.clone();

    let mut tokens = Vec::new();
    if error.is_none() {
        match analyze_lines(source, &scan) {
            Ok(mut emitted) => tokens.append(&mut emitted),
            Err(message) => error = Some(message),
        }
    }

    if error.is_some() {
        tokens.clear();
    }
    tokens.extend(scan.comments.iter().cloned());
    tokens.sort_by(|a, b| (a.line, a.column).cmp(&(b.line, b.column)));

    let status = match error {
        None => ParseStatus::Parsed,
        Some(message) => ParseStatus::Malformed { message },
    };
    ParsedScript {
        stream: TokenStream { script: script.to_path_buf(), dialect: Dialect::Chef, tokens, loc },
        status,
    }
}

/// Replace every `#{...}` hole in a double-quoted or heredoc body with
/// [`INTERPOLATION_PLACEHOLDER`]. A literal that consists of exactly one
/// hole becomes the empty string (its value is entirely runtime-computed).
pub fn interpolation_strip(raw: &str) -> String {
    let bytes = raw.as_bytes();
    let mut out = String::new();
    let mut i = 0;
    let mut holes = 0;
    let mut kept_chars = false;
    while i < bytes.len() {
        if bytes[i] == b'#' && bytes.get(i + 1) == Some(&b'{') {
            let close = hole_end(raw, i + 2);
            out.push_str(INTERPOLATION_PLACEHOLDER);
            holes += 1;
            i = close;
        } else {
            let c = raw[i..].chars().next().expect("in bounds");
            out.push(c);
            kept_chars = true;
            i += c.len_utf8();
        }
    }
    if holes == 1 && !kept_chars {
        return String::new();
    }
    out
}

/// Find the byte index just past the `}` closing a hole whose body starts at
/// `start`. Nested braces and quoted strings inside the hole are skipped.
fn hole_end(raw: &str, start: usize) -> usize {
    let bytes = raw.as_bytes();
    let mut depth = 1usize;
    let mut in_str: Option<u8> = None;
    let mut i = start;
    while i < bytes.len() {
        let b = bytes[i];
        match in_str {
            Some(q) => {
                if b == b'\\' {
                    i += 1;
                } else if b == q {
                    in_str = None;
                }
            }
            None => match b {
                b'\'' | b'"' => in_str = Some(b),
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        return i + 1;
                    }
                }
                _ => {}
            },
        }
        i += 1;
    }
    bytes.len()
}

/// One string literal found by the raw scan, attached to the line where it
/// starts.
#[derive(Debug)]
struct Literal {
    value: String,
}

#[derive(Debug, Default)]
struct RawScan {
    /// One entry per source line: code text with comments removed and each
    /// literal replaced by [`MASK`].
    masked: Vec<String>,
    literals: Vec<Literal>,
    /// Literal indices per line, in order of appearance.
    line_literals: Vec<Vec<usize>>,
    comments: Vec<Token>,
    error: Option<String>,
}

struct PendingHeredoc {
    terminator: String,
    interpolating: bool,
    literal_index: usize,
    start_line: usize,
}

/// Phase one: split code, comments, and string literals.
fn raw_scan(source: &str) -> RawScan {
    let mut out = RawScan::default();
    let mut pending_heredocs: Vec<PendingHeredoc> = Vec::new();
    let mut active_heredoc: Option<(PendingHeredoc, String)> = None;

    // Double-quote interpolation frames: brace depth plus inner-string quote.
    struct Hole {
        depth: usize,
        in_str: Option<char>,
    }
    enum Mode {
        Code,
        Single { start_line: usize, body: String },
        Double { start_line: usize, quote: char, body: String, holes: Vec<Hole> },
    }
    let mut mode = Mode::Code;

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        out.masked.push(String::new());
        out.line_literals.push(Vec::new());

        // A line consumed by an active heredoc contributes no code.
        if let Some((pending, body)) = active_heredoc.as_mut() {
            if line.trim() == pending.terminator {
                let (done, body) = active_heredoc.take().expect("active");
                out.literals[done.literal_index].value =
                    if done.interpolating { interpolation_strip(&body) } else { body };
                if !pending_heredocs.is_empty() {
                    let next = pending_heredocs.remove(0);
                    active_heredoc = Some((next, String::new()));
                }
            } else {
                body.push_str(line);
                body.push('\n');
            }
            continue;
        }

        let mut chars = line.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            match &mut mode {
                Mode::Code => match c {
                    '#' => {
                        let text = line[i + 1..].trim();
                        if !text.is_empty() {
                            let mut t = Token::new(TokenKind::Comment, "", text, line_no);
                            t.column = i;
                            out.comments.push(t);
                        }
                        break;
                    }
                    '\'' => {
                        push_mask(&mut out, idx);
                        mode = Mode::Single { start_line: line_no, body: String::new() };
                    }
                    '"' | '`' => {
                        push_mask(&mut out, idx);
                        mode = Mode::Double { start_line: line_no, quote: c, body: String::new(), holes: Vec::new() };
                    }
                    '<' if chars.peek().is_some_and(|&(_, n)| n == '<') => {
                        // Possible heredoc introducer.
                        let rest = &line[i + 2..];
                        if let Some((terminator, interpolating, consumed)) = heredoc_header(rest) {
                            chars.next(); // second '<'
                            for _ in 0..consumed {
                                chars.next();
                            }
                            push_mask(&mut out, idx);
                            let literal_index = out.literals.len() - 1;
                            pending_heredocs.push(PendingHeredoc {
                                terminator,
                                interpolating,
                                literal_index,
                                start_line: line_no,
                            });
                        } else {
                            out.masked[idx].push('<');
                        }
                    }
                    _ => out.masked[idx].push(c),
                },
                Mode::Single { body, .. } => match c {
                    '\\' => {
                        match chars.next() {
                            Some((_, '\'')) => body.push('\''),
                            Some((_, '\\')) => body.push('\\'),
                            Some((_, other)) => {
                                body.push('\\');
                                body.push(other);
                            }
                            None => body.push('\\'),
                        }
                    }
                    '\'' => {
                        let value = std::mem::take(body);
                        out.literals.last_mut().expect("literal open").value = value;
                        mode = Mode::Code;
                    }
                    _ => body.push(c),
                },
                Mode::Double { quote, body, holes, .. } => {
                    if let Some(hole) = holes.last_mut() {
                        // Inside an interpolation hole: copy raw, track nesting.
                        body.push(c);
                        match hole.in_str {
                            Some(q) => {
                                if c == '\\' {
                                    if let Some((_, e)) = chars.next() {
                                        body.push(e);
                                    }
                                } else if c == q {
                                    hole.in_str = None;
                                }
                            }
                            None => match c {
                                '\'' | '"' => hole.in_str = Some(c),
                                '{' => hole.depth += 1,
                                '}' => {
                                    hole.depth -= 1;
                                    if hole.depth == 0 {
                                        holes.pop();
                                    }
                                }
                                _ => {}
                            },
                        }
                        continue;
                    }
                    match c {
                        '\\' => match chars.next() {
                            Some((_, '"')) if *quote == '"' => body.push('"'),
                            Some((_, '`')) if *quote == '`' => body.push('`'),
                            Some((_, '\\')) => body.push('\\'),
                            Some((_, other)) => {
                                body.push('\\');
                                body.push(other);
                            }
                            None => body.push('\\'),
                        },
                        '#' if chars.peek().is_some_and(|&(_, n)| n == '{') => {
                            body.push('#');
                            body.push('{');
                            chars.next();
                            holes.push(Hole { depth: 1, in_str: None });
                        }
                        c if c == *quote => {
                            let value = interpolation_strip(body);
                            out.literals.last_mut().expect("literal open").value = value;
                            mode = Mode::Code;
                        }
                        _ => body.push(c),
                    }
                }
            }
        }

        // End of physical line.
        match &mut mode {
            Mode::Code => {
                if !pending_heredocs.is_empty() {
                    let first = pending_heredocs.remove(0);
                    active_heredoc = Some((first, String::new()));
                }
            }
            Mode::Single { body, .. } | Mode::Double { body, .. } => body.push('\n'),
        }
    }

    match mode {
        Mode::Code => {}
        Mode::Single { start_line, .. } | Mode::Double { start_line, .. } => {
            out.error = Some(format!("unterminated string literal starting on line {start_line}"));
        }
    }
    if let Some((pending, _)) = &active_heredoc {
        out.error = Some(format!(
            "unterminated heredoc <<{} starting on line {}",
            pending.terminator, pending.start_line
        ));
    } else if let Some(pending) = pending_heredocs.first() {
        out.error = Some(format!(
            "unterminated heredoc <<{} starting on line {}",
            pending.terminator, pending.start_line
        ));
    }
    out
}

/// Record a literal placeholder at the current position of line `idx`.
fn push_mask(out: &mut RawScan, idx: usize) {
    out.masked[idx].push(MASK);
    out.literals.push(Literal { value: String::new() });
    out.line_literals[idx].push(out.literals.len() - 1);
}

/// Parse a heredoc introducer after `<<`. Returns the terminator, whether
/// the body interpolates, and how many chars of `rest` were consumed.
fn heredoc_header(rest: &str) -> Option<(String, bool, usize)> {
    let mut consumed = 0;
    let mut chars = rest.chars().peekable();
    if matches!(chars.peek(), Some('~') | Some('-')) {
        chars.next();
        consumed += 1;
    }
    match chars.peek() {
        Some('\'') | Some('"') => {
            let quote = chars.next().expect("peeked");
            consumed += 1;
            let mut term = String::new();
            for c in chars.by_ref() {
                consumed += 1;
                if c == quote {
                    if term.is_empty() {
                        return None;
                    }
                    return Some((term, quote == '"', consumed));
                }
                term.push(c);
            }
            None
        }
        Some(c) if c.is_ascii_alphabetic() || *c == '_' => {
            let mut term = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    term.push(c);
                    chars.next();
                    consumed += 1;
                } else {
                    break;
                }
            }
            Some((term, true, consumed))
        }
        _ => None,
    }
}

/// Ruby keywords that open a block closed by `end`.
const OPENERS: [&str; 9] = ["if", "unless", "while", "until", "for", "begin", "def", "class", "module"];
/// Keywords that can never start a property or variable line.
const CONTROL_WORDS: [&str; 17] = [
    "if", "unless", "while", "until", "for", "begin", "def", "class", "module", "case", "when",
    "then", "else", "elsif", "end", "rescue", "ensure",
];

enum BlockFrame {
    Case { line: usize, column: usize, subject: String, else_seen: bool },
    Plain {
        /// Whether this frame allocated a sibling-scope block id (resources
        /// and `do` blocks do; `if`/`def`/loop frames do not).
        pushed_block: bool,
    },
}

/// Open multiline hash literal assigned to an attribute.
struct HashContext {
    is_default: bool,
    depth: i64,
}

/// Phase two: walk masked lines, keep the block stack, and emit tokens.
fn analyze_lines(source: &str, scan: &RawScan) -> Result<Vec<Token>, String> {
    let raw_lines: Vec<&str> = source.lines().collect();
    let mut tokens = Vec::new();
    let mut stack: Vec<BlockFrame> = Vec::new();
    let mut block_stack: Vec<usize> = vec![1];
    let mut next_block = 1usize;
    let mut hash_ctx: Option<HashContext> = None;

    for (idx, masked) in scan.masked.iter().enumerate() {
        let line_no = idx + 1;
        let words = scan_words(masked);
        let lits = LiteralQueue::new(scan, idx);
        let trimmed_start = masked.len() - masked.trim_start().len();

        let mut resource_opened = false;

        if let Some(ctx) = hash_ctx.as_mut() {
            // Inside a multiline hash literal: lines are entries.
            if let Some((name, value)) = rocket_entry(masked, &lits) {
                let mut t = Token::new(TokenKind::Property, name, value, line_no);
                t.column = trimmed_start;
                t.is_default_attribute = ctx.is_default;
                t.block = *block_stack.last().expect("block stack never empty");
                tokens.push(t);
            }
            ctx.depth += brace_balance(masked);
            if ctx.depth <= 0 {
                hash_ctx = None;
            }
        } else if let Some(extraction) = extract_statement(masked, &lits) {
            let block = *block_stack.last().expect("block stack never empty");
            match extraction {
                Extraction::Attribute { name, value, is_default, hash_entries, open_hash } => {
                    let mut t = Token::new(TokenKind::Attribute, name, value, line_no);
                    t.column = trimmed_start;
                    t.is_default_attribute = is_default;
                    t.block = block;
                    tokens.push(t);
                    for (name, value) in hash_entries {
                        let mut t = Token::new(TokenKind::Property, name, value, line_no);
                        t.column = trimmed_start;
                        t.is_default_attribute = is_default;
                        t.block = block;
                        tokens.push(t);
                    }
                    if open_hash {
                        hash_ctx = Some(HashContext { is_default, depth: brace_balance(masked) });
                    }
                }
                Extraction::Variable { name, value } => {
                    let mut t = Token::new(TokenKind::Variable, name, value, line_no);
                    t.column = trimmed_start;
                    t.block = block;
                    tokens.push(t);
                }
                Extraction::Resource { name, value } => {
                    let mut t = Token::new(TokenKind::Resource, name, value, line_no);
                    t.column = trimmed_start;
                    t.block = block;
                    tokens.push(t);
                    next_block += 1;
                    block_stack.push(next_block);
                    stack.push(BlockFrame::Plain { pushed_block: true });
                    resource_opened = true;
                }
                Extraction::Property { name, value } => {
                    let mut t = Token::new(TokenKind::Property, name, value, line_no);
                    t.column = trimmed_start;
                    t.block = block;
                    tokens.push(t);
                }
            }
        }

        // Control scan: block openers, do/end balance, case/else bookkeeping.
        let mut pushed_opener = resource_opened;
        for w in &words {
            if w.dot_prefixed {
                continue;
            }
            let statement_position = w.first_word || w.after_assignment;
            match w.text {
                "case" if statement_position && !pushed_opener => {
                    let raw = raw_lines.get(idx).copied().unwrap_or("");
                    let subject = case_subject(raw, masked, w.start);
                    stack.push(BlockFrame::Case {
                        line: line_no,
                        column: w.start,
                        subject,
                        else_seen: false,
                    });
                    pushed_opener = true;
                }
                kw if OPENERS.contains(&kw) && statement_position && !pushed_opener => {
                    stack.push(BlockFrame::Plain { pushed_block: false });
                    pushed_opener = true;
                }
                "do" => {
                    if pushed_opener {
                        // The block this `do` belongs to is already counted.
                        continue;
                    }
                    next_block += 1;
                    block_stack.push(next_block);
                    stack.push(BlockFrame::Plain { pushed_block: true });
                    pushed_opener = true;
                }
                "else" => {
                    if let Some(BlockFrame::Case { else_seen, .. }) = stack.last_mut() {
                        *else_seen = true;
                    }
                }
                "end" => match stack.pop() {
                    None => return Err(format!("unmatched `end` on line {line_no}")),
                    Some(BlockFrame::Case { line, column, subject, else_seen }) => {
                        let mut t = Token::new(TokenKind::CaseStmt, "case", subject, line);
                        t.column = column;
                        t.else_branch_present = else_seen;
                        t.block = *block_stack.last().expect("block stack never empty");
                        tokens.push(t);
                    }
                    Some(BlockFrame::Plain { pushed_block }) => {
                        if pushed_block {
                            block_stack.pop();
                        }
                    }
                },
                _ => {}
            }
        }
    }

    if !stack.is_empty() {
        return Err("unterminated block at end of file".to_string());
    }
    Ok(tokens)
}

/// Net `{`/`}` balance of a masked line.
fn brace_balance(masked: &str) -> i64 {
    let mut n = 0i64;
    for c in masked.chars() {
        match c {
            '{' => n += 1,
            '}' => n -= 1,
            _ => {}
        }
    }
    n
}

/// Subject text of a `case` statement: the raw line content after the
/// keyword. Falls back to the masked text when positions cannot be aligned
/// (masking only shifts positions after the first literal, and `case`
/// precedes any literal on well-formed lines).
fn case_subject(raw: &str, masked: &str, case_start: usize) -> String {
    let after = case_start + "case".len();
    if raw.get(case_start..after) == Some("case") {
        if let Some(rest) = raw.get(after..) {
            return rest.trim().to_string();
        }
    }
    masked.get(after..).map(|s| s.trim().to_string()).unwrap_or_default()
}

struct Word<'a> {
    text: &'a str,
    start: usize,
    first_word: bool,
    /// Preceded (ignoring whitespace) by a plain `=` or `||=`.
    after_assignment: bool,
    /// Preceded immediately by `.` or `&.` (method call, not a keyword).
    dot_prefixed: bool,
}

/// Identifier-shaped words of a masked line with statement-position context.
fn scan_words(masked: &str) -> Vec<Word<'_>> {
    let bytes = masked.as_bytes();
    let mut words = Vec::new();
    let mut i = 0;
    let mut seen_word = false;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_alphabetic() || b == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            // Method-name suffixes keep `end_with?` distinct from `end`.
            if i < bytes.len() && (bytes[i] == b'?' || bytes[i] == b'!') {
                i += 1;
            }
            let text = &masked[start..i];
            let before = masked[..start].trim_end();
            let dot_prefixed = before.ends_with('.');
            let after_assignment = {
                let b = before.as_bytes();
                match b.last() {
                    Some(b'=') => {
                        // `=` yes; `==`, `=>`(impossible, > last), `<=`, `>=`, `!=`, `=~` no.
                        b.len() < 2 || !matches!(b[b.len() - 2], b'=' | b'<' | b'>' | b'!')
                    }
                    _ => false,
                }
            };
            words.push(Word { text, start, first_word: !seen_word, after_assignment, dot_prefixed });
            seen_word = true;
        } else if b == b':' && i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphabetic() || bytes[i + 1] == b'_') {
            // Symbol: skip so its name is not treated as a word.
            i += 1;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            seen_word = true;
        } else {
            if !b.is_ascii_whitespace() && b != b'(' {
                seen_word = true;
            }
            i += if b < 0x80 {
                1
            } else {
                masked[i..].chars().next().expect("in bounds").len_utf8()
            };
        }
    }
    words
}

enum Extraction {
    Attribute {
        name: String,
        value: String,
        is_default: bool,
        hash_entries: Vec<(String, String)>,
        open_hash: bool,
    },
    Variable {
        name: String,
        value: String,
    },
    Resource {
        name: String,
        value: String,
    },
    Property {
        name: String,
        value: String,
    },
}

/// The literal values appearing on one masked line, in order. Cursors track
/// which placeholder they are at via their own mask index, so lookups here
/// are positional reads.
struct LiteralQueue<'a> {
    values: Vec<&'a str>,
}

impl<'a> LiteralQueue<'a> {
    fn new(scan: &'a RawScan, idx: usize) -> LiteralQueue<'a> {
        LiteralQueue {
            values: scan.line_literals[idx].iter().map(|&i| scan.literals[i].value.as_str()).collect(),
        }
    }

    /// Value of the `n`-th literal on the line (0-based).
    fn nth(&self, n: usize) -> Option<&'a str> {
        self.values.get(n).copied()
    }
}

/// A literal-ish right-hand side or argument, resolved to the value text the
/// rules should see.
fn literal_arg(cursor: &mut Cursor, lits: &LiteralQueue) -> Option<String> {
    cursor.skip_ws();
    match cursor.peek() {
        Some(MASK) => {
            let v = lits.nth(cursor.mask_index).map(str::to_string);
            cursor.bump();
            cursor.mask_index += 1;
            v
        }
        Some(':') => {
            cursor.bump();
            let sym = cursor.take_ident();
            if sym.is_empty() {
                None
            } else {
                Some(sym)
            }
        }
        Some(c) if c.is_ascii_digit() => Some(cursor.take_number()),
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {
            let word = cursor.take_ident();
            match word.as_str() {
                "true" => Some("true".to_string()),
                "false" => Some("false".to_string()),
                "nil" => Some(String::new()),
                _ => None,
            }
        }
        _ => None,
    }
}

#[derive(Clone, Copy)]
struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    /// Number of [`MASK`] placeholders already consumed.
    mask_index: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Cursor<'a> {
        Cursor { text, pos: 0, mask_index: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.pos += c.len_utf8();
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c == ' ' || c == '\t') {
            self.bump();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn take_ident(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.bump();
        }
        self.text[start..self.pos].to_string()
    }

    fn take_number(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '.' || c == '_') {
            self.bump();
        }
        self.text[start..self.pos].to_string()
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    /// Try to consume `=` or `||=` (but not `==`, `=>`, `=~`, `<=`, etc.).
    fn eat_assign_op(&mut self) -> bool {
        let rest = self.rest();
        if let Some(stripped) = rest.strip_prefix("||=") {
            let _ = stripped;
            self.pos += 3;
            return true;
        }
        if rest.starts_with('=') && !rest.starts_with("==") && !rest.starts_with("=>") && !rest.starts_with("=~") {
            self.pos += 1;
            return true;
        }
        false
    }
}

/// Match one masked line against the attribute / variable / resource /
/// property shapes, in that order.
fn extract_statement(masked: &str, lits: &LiteralQueue) -> Option<Extraction> {
    let trimmed = masked.trim();
    if trimmed.is_empty() {
        return None;
    }
    let mut cursor = Cursor::new(trimmed);

    // Sigils introduce instance/class/global variables.
    let mut sigil = 0;
    while matches!(cursor.peek(), Some('@') | Some('$')) {
        cursor.bump();
        sigil += 1;
    }
    let ident = cursor.take_ident();
    if ident.is_empty() {
        return None;
    }

    if sigil == 0 && (ident == "node" || ident == "default") {
        if let Some(extraction) = try_attribute(&cursor, &ident, lits) {
            return Some(extraction);
        }
    }
    if CONTROL_WORDS.contains(&ident.as_str()) || ident == "do" {
        return None;
    }

    // Variable assignment: `name = <literal>` or `name ||= <literal>`.
    {
        let mut c = cursor;
        c.skip_ws();
        if c.eat_assign_op() {
            let value = literal_arg(&mut c, lits)?;
            return Some(Extraction::Variable { name: ident, value });
        }
    }
    if sigil > 0 {
        return None;
    }

    // Resource declaration: `ident 'literal' ... do [|args|]`.
    let after_ident = cursor.rest();
    let opens_block = line_ends_with_do(cursor.text);
    {
        let mut c = cursor;
        c.skip_ws();
        let _ = c.eat('(');
        c.skip_ws();
        if c.peek() == Some(MASK) {
            let value = lits.nth(c.mask_index).unwrap_or_default().to_string();
            if opens_block {
                return Some(Extraction::Resource { name: ident, value });
            }
            return Some(Extraction::Property { name: ident, value });
        }
    }
    if opens_block {
        return None;
    }

    // Property with a non-string literal argument: `action :create`, `port 80`.
    if !after_ident.starts_with([' ', '\t', '(']) {
        return None;
    }
    let mut c = cursor;
    c.skip_ws();
    let _ = c.eat('(');
    let value = literal_arg(&mut c, lits)?;
    Some(Extraction::Property { name: ident, value })
}

/// `node['a']['b'] = v`, `default['a'] = v`, `node.default['a'] = v`.
fn try_attribute(cursor: &Cursor, root: &str, lits: &LiteralQueue) -> Option<Extraction> {
    let mut c = *cursor;
    let mut is_default = root == "default";
    if root == "node" && c.rest().starts_with(".default") {
        c.pos += ".default".len();
        is_default = true;
    }
    if c.peek() != Some('[') {
        return None;
    }
    let mut segments = Vec::new();
    while c.eat('[') {
        c.skip_ws();
        match c.peek() {
            Some(MASK) => {
                segments.push(lits.nth(c.mask_index).unwrap_or_default().to_string());
                c.bump();
                c.mask_index += 1;
            }
            Some(':') => {
                c.bump();
                segments.push(c.take_ident());
            }
            Some(d) if d.is_ascii_digit() => segments.push(c.take_number()),
            _ => {
                // Dynamic key: record a hole and skip to the closing bracket.
                segments.push(INTERPOLATION_PLACEHOLDER.to_string());
                while let Some(ch) = c.peek() {
                    if ch == ']' {
                        break;
                    }
                    if ch == MASK {
                        c.mask_index += 1;
                    }
                    c.bump();
                }
            }
        }
        c.skip_ws();
        if !c.eat(']') {
            return None;
        }
    }
    if segments.is_empty() {
        return None;
    }
    c.skip_ws();
    if !c.eat_assign_op() {
        return None;
    }
    c.skip_ws();
    let name = segments.join(".");

    // Hash literal right-hand side expands into per-entry properties.
    if c.peek() == Some('{') {
        c.bump();
        let mut entries = Vec::new();
        let open_hash = brace_balance(c.text) > 0;
        loop {
            c.skip_ws();
            if c.peek().is_none() || c.peek() == Some('}') {
                break;
            }
            match hash_entry(&mut c, lits) {
                Some(entry) => entries.push(entry),
                None => break,
            }
            c.skip_ws();
            if !c.eat(',') {
                break;
            }
        }
        return Some(Extraction::Attribute {
            name,
            value: String::new(),
            is_default,
            hash_entries: entries,
            open_hash,
        });
    }

    let value = literal_arg(&mut c, lits)?;
    Some(Extraction::Attribute { name, value, is_default, hash_entries: Vec::new(), open_hash: false })
}

/// One `key => value` or `key: value` pair.
fn hash_entry(c: &mut Cursor, lits: &LiteralQueue) -> Option<(String, String)> {
    c.skip_ws();
    let key = match c.peek() {
        Some(MASK) => {
            let v = lits.nth(c.mask_index).unwrap_or_default().to_string();
            c.bump();
            c.mask_index += 1;
            v
        }
        Some(':') => {
            c.bump();
            c.take_ident()
        }
        Some(ch) if ch.is_ascii_alphabetic() || ch == '_' => c.take_ident(),
        _ => return None,
    };
    c.skip_ws();
    if c.rest().starts_with("=>") {
        c.pos += 2;
    } else if c.eat(':') {
        // Ruby 1.9 hash syntax.
    } else {
        return None;
    }
    let value = literal_arg(c, lits)?;
    Some((key, value))
}

/// A standalone hash entry line inside a multiline hash literal.
fn rocket_entry(masked: &str, lits: &LiteralQueue) -> Option<(String, String)> {
    let trimmed = masked.trim();
    let mut c = Cursor::new(trimmed);
    let entry = hash_entry(&mut c, lits)?;
    Some(entry)
}

/// Whether the masked line ends with a `do` block opener (allowing block
/// parameters `|x, y|` and trailing whitespace).
fn line_ends_with_do(masked: &str) -> bool {
    let mut t = masked.trim_end();
    if t.ends_with('|') {
        // Strip `|params|`.
        let without = t.trim_end_matches('|');
        let Some(bar) = without.rfind('|') else { return false };
        t = without[..bar].trim_end();
    }
    t == "do" || t.ends_with(" do") || t.ends_with("\tdo") || t.ends_with(&format!("{MASK} do"))
}
