//! Ansible playbook parser: turns YAML documents into KEY and COMMENT tokens.
//!
//! Every scalar-valued mapping entry becomes a KEY token carrying the path of
//! enclosing key names (lists are traversed transparently and contribute no
//! path segment). Comments are recovered by a quote-aware line scan, which
//! also works when the YAML itself is malformed. Jinja2 template expressions
//! are kept as opaque scalar text; vault-encrypted values are replaced by
//! [`VAULT_SENTINEL`] so their ciphertext never reaches the rules.

use std::path::Path;

use yaml_rust2::parser::{Event, MarkedEventReceiver, Parser, Tag};
use yaml_rust2::scanner::{Marker, TScalarStyle};

use crate::model::{Dialect, ParseStatus, ParsedScript, Token, TokenKind, TokenStream};

/// Replacement value for vault-encrypted scalars. Chosen so that no pattern
/// function can match it and rule logic can recognize it explicitly.
pub const VAULT_SENTINEL: &str = "⟦vaulted⟧";

/// Parse one playbook or variable file.
///
/// On YAML errors the result is marked malformed and the stream carries only
/// the line-scanned comment tokens.
pub fn parse_ansible(source: &str, script: &Path) -> ParsedScript {
    let loc = source.lines().count();
    let comments = scan_comments(source);

    let mut builder = Builder::default();
    let mut parser = Parser::new_from_str(source);
    let status = match parser.load(&mut builder, true) {
        Ok(()) => ParseStatus::Parsed,
        Err(e) => ParseStatus::Malformed { message: e.to_string() },
    };

    let mut tokens = if status.is_malformed() { Vec::new() } else { builder.tokens };
    tokens.extend(comments);
    tokens.sort_by(|a, b| (a.line, a.column).cmp(&(b.line, b.column)));

    ParsedScript {
        stream: TokenStream { script: script.to_path_buf(), dialect: Dialect::Ansible, tokens, loc },
        status,
    }
}

/// Resolve a scalar to the value text the rules should see, following the
/// YAML 1.1 conventions Ansible uses: plain booleans normalize to
/// `true`/`false`, plain nulls to the empty string, and everything else
/// (numbers included) keeps its source form. Quoted and block scalars are
/// never reinterpreted, and vault-tagged scalars collapse to
/// [`VAULT_SENTINEL`].
pub fn render_scalar(raw: &str, style: TScalarStyle, tag: Option<&Tag>) -> String {
    if let Some(t) = tag {
        if t.handle == "!" && t.suffix.eq_ignore_ascii_case("vault") {
            return VAULT_SENTINEL.to_string();
        }
        if t.handle == "tag:yaml.org,2002:" {
            match t.suffix.as_str() {
                "bool" => return if TRUE_WORDS.contains(&raw) { "true" } else { "false" }.to_string(),
                "null" => return String::new(),
                _ => return raw.to_string(),
            }
        }
        return raw.to_string();
    }
    if style != TScalarStyle::Plain {
        return raw.to_string();
    }
    if TRUE_WORDS.contains(&raw) {
        return "true".to_string();
    }
    if FALSE_WORDS.contains(&raw) {
        return "false".to_string();
    }
    if NULL_WORDS.contains(&raw) {
        return String::new();
    }
    raw.to_string()
}

const TRUE_WORDS: [&str; 9] = ["yes", "Yes", "YES", "true", "True", "TRUE", "on", "On", "ON"];
const FALSE_WORDS: [&str; 9] = ["no", "No", "NO", "false", "False", "FALSE", "off", "Off", "OFF"];
const NULL_WORDS: [&str; 5] = ["", "~", "null", "Null", "NULL"];

/// Extract comment tokens with a per-line scan that honors single and double
/// quotes. A `#` starts a comment only at line start or after whitespace.
fn scan_comments(source: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        if let Some((col, text)) = comment_in_line(line) {
            let value = text.trim();
            if value.is_empty() {
                continue;
            }
            let mut token = Token::new(TokenKind::Comment, "", value, idx + 1);
            token.column = col;
            out.push(token);
        }
    }
    out
}

fn comment_in_line(line: &str) -> Option<(usize, &str)> {
    let mut in_single = false;
    let mut in_double = false;
    let mut prev: Option<char> = None;
    let mut chars = line.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '\'' if !in_double => in_single = !in_single,
            '"' if !in_single => in_double = !in_double,
            '\\' if in_double => {
                // Skip the escaped character.
                if let Some((_, e)) = chars.next() {
                    prev = Some(e);
                    continue;
                }
            }
            '#' if !in_single && !in_double => {
                if prev.is_none_or(char::is_whitespace) {
                    return Some((i, &line[i + 1..]));
                }
            }
            _ => {}
        }
        prev = Some(c);
    }
    None
}

/// Slot state for the entry currently being read in a mapping.
enum KeySlot {
    ExpectKey,
    /// Key seen; `None` means a complex (non-scalar) key whose value must be
    /// consumed silently.
    HaveKey(Option<(String, Marker)>),
}

enum Frame {
    Document,
    Mapping { slot: KeySlot, pushed_path: bool, pushed_block: bool },
    Sequence,
}

#[derive(Default)]
struct Builder {
    tokens: Vec<Token>,
    path: Vec<String>,
    stack: Vec<Frame>,
    block_stack: Vec<usize>,
    next_block: usize,
    /// Depth of containers nested inside a complex key; while positive no
    /// tokens are produced.
    discard_depth: usize,
}

impl Builder {
    fn current_block(&self) -> usize {
        self.block_stack.last().copied().unwrap_or(0)
    }

    /// Close out the parent's key slot when a value (scalar, alias, or
    /// container) has been fully consumed.
    fn note_value_consumed(&mut self) {
        if let Some(Frame::Mapping { slot, .. }) = self.stack.last_mut() {
            *slot = KeySlot::ExpectKey;
        }
    }

    /// Returns what to do with a container that just started, based on the
    /// parent frame: the path segment to push (if it is a keyed value) and
    /// whether it opens a new sibling block.
    fn enter_container(&mut self, is_mapping: bool) -> Frame {
        if self.discard_depth > 0 {
            self.discard_depth += 1;
            return if is_mapping {
                Frame::Mapping { slot: KeySlot::ExpectKey, pushed_path: false, pushed_block: false }
            } else {
                Frame::Sequence
            };
        }
        let mut pushed_path = false;
        let mut new_block = false;
        match self.stack.last_mut() {
            Some(Frame::Mapping { slot, .. }) => match slot {
                KeySlot::ExpectKey => {
                    // Container in key position: a complex key. Consume it
                    // silently and leave the entry unnamed.
                    *slot = KeySlot::HaveKey(None);
                    self.discard_depth = 1;
                }
                KeySlot::HaveKey(key) => {
                    if let Some((name, _)) = key.take() {
                        self.path.push(name);
                        pushed_path = true;
                    }
                }
            },
            Some(Frame::Sequence) | Some(Frame::Document) => {
                new_block = is_mapping;
            }
            None => {}
        }
        if new_block {
            self.next_block += 1;
            self.block_stack.push(self.next_block);
        }
        if is_mapping {
            Frame::Mapping { slot: KeySlot::ExpectKey, pushed_path, pushed_block: new_block }
        } else {
            Frame::Sequence
        }
    }

    fn leave_container(&mut self) {
        let frame = self.stack.pop();
        if self.discard_depth > 0 {
            self.discard_depth -= 1;
            if self.discard_depth == 0 {
                // The complex key has ended; its entry stays unnamed.
            }
            return;
        }
        if let Some(Frame::Mapping { pushed_path, pushed_block, .. }) = frame {
            if pushed_path {
                self.path.pop();
            }
            if pushed_block {
                self.block_stack.pop();
            }
        }
        self.note_value_consumed();
    }

    fn on_scalar(&mut self, value: String, style: TScalarStyle, tag: Option<Tag>, mark: Marker) {
        if self.discard_depth > 0 {
            return;
        }
        let block = self.current_block();
        match self.stack.last_mut() {
            Some(Frame::Mapping { slot, .. }) => match slot {
                KeySlot::ExpectKey => {
                    *slot = KeySlot::HaveKey(Some((value, mark)));
                }
                KeySlot::HaveKey(key) => {
                    let rendered = render_scalar(&value, style, tag.as_ref());
                    if let Some((name, key_mark)) = key.take() {
                        let mut token = Token::new(TokenKind::Key, name, rendered, key_mark.line());
                        token.column = key_mark.col();
                        token.key_path = self.path.clone();
                        token.block = block;
                        self.tokens.push(token);
                    }
                    *slot = KeySlot::ExpectKey;
                }
            },
            _ => {
                // Scalar list item or bare document scalar: no token.
            }
        }
    }
}

impl MarkedEventReceiver for Builder {
    fn on_event(&mut self, ev: Event, mark: Marker) {
        match ev {
            Event::StreamStart | Event::StreamEnd | Event::Nothing => {}
            Event::DocumentStart => self.stack.push(Frame::Document),
            Event::DocumentEnd => {
                self.stack.pop();
            }
            Event::MappingStart(_, _) => {
                let frame = self.enter_container(true);
                self.stack.push(frame);
            }
            Event::SequenceStart(_, _) => {
                let frame = self.enter_container(false);
                self.stack.push(frame);
            }
            Event::MappingEnd | Event::SequenceEnd => self.leave_container(),
            Event::Scalar(value, style, _, tag) => self.on_scalar(value, style, tag, mark),
            Event::Alias(_) => {
                if self.discard_depth == 0 {
                    if let Some(Frame::Mapping { slot, .. }) = self.stack.last_mut() {
                        match slot {
                            // Alias in key position: treat as an unnamed key.
                            KeySlot::ExpectKey => *slot = KeySlot::HaveKey(None),
                            // Alias value: not a literal, no token.
                            KeySlot::HaveKey(_) => *slot = KeySlot::ExpectKey,
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::PatternFn;
    use std::path::PathBuf;
    use yaml_rust2::yaml::{Yaml, YamlLoader};

    fn parse(src: &str) -> ParsedScript {
        parse_ansible(src, &PathBuf::from("play.yml"))
    }

    fn keys(p: &ParsedScript) -> Vec<&Token> {
        p.stream.tokens.iter().filter(|t| t.kind == TokenKind::Key).collect()
    }

    #[test]
    fn playbook_keys_carry_paths_and_lines() {
        let src = "\
- hosts: all
  vars:
    db_user: admin
  tasks:
    - name: create file
      file:
        path: /tmp/sample.txt
        state: touch
";
        let p = parse(src);
        assert_eq!(p.status, ParseStatus::Parsed);
        assert_eq!(p.stream.loc, 8);
        let got: Vec<(String, String, usize, Vec<String>)> = keys(&p)
            .iter()
            .map(|t| (t.name.clone(), t.value.clone(), t.line, t.key_path.clone()))
            .collect();
        let want: Vec<(String, String, usize, Vec<String>)> = vec![
            ("hosts".into(), "all".into(), 1, vec![]),
            ("db_user".into(), "admin".into(), 3, vec!["vars".into()]),
            ("name".into(), "create file".into(), 5, vec!["tasks".into()]),
            ("path".into(), "/tmp/sample.txt".into(), 7, vec!["tasks".into(), "file".into()]),
            ("state".into(), "touch".into(), 8, vec!["tasks".into(), "file".into()]),
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn scalar_rendering_follows_yaml_1_1() {
        let cases = [
            ("flag: yes", "true"),
            ("flag: Yes", "true"),
            ("flag: TRUE", "true"),
            ("flag: on", "true"),
            ("flag: no", "false"),
            ("flag: Off", "false"),
            ("flag: FALSE", "false"),
            ("flag: ~", ""),
            ("flag: null", ""),
            ("flag: NULL", ""),
            ("flag:", ""),
            ("flag: 0644", "0644"),
            ("flag: 3.14", "3.14"),
            ("flag: yEs", "yEs"),
            ("flag: y", "y"),
            ("flag: N", "N"),
            ("flag: \"yes\"", "yes"),
            ("flag: 'no'", "no"),
            ("flag: \"\"", ""),
            ("flag: '{{ lookup($v) }}'", "{{ lookup($v) }}"),
        ];
        for (src, want) in cases {
            let p = parse(src);
            let ks = keys(&p);
            assert_eq!(ks.len(), 1, "{src:?}");
            assert_eq!(ks[0].value, want, "{src:?}");
        }
    }

    #[test]
    fn tagged_scalars_resolve_by_tag() {
        let p = parse("a: !!bool yes\nb: !!str 5\nc: !!null x\nd: !Ref thing\n");
        let got: Vec<(String, String)> =
            keys(&p).iter().map(|t| (t.name.clone(), t.value.clone())).collect();
        assert_eq!(
            got,
            vec![
                ("a".into(), "true".into()),
                ("b".into(), "5".into()),
                ("c".into(), String::new()),
                ("d".into(), "thing".into()),
            ]
        );
    }

    #[test]
    fn vault_values_become_an_inert_sentinel() {
        let src = "pw: !vault |\n  $ANSIBLE_VAULT;1.1;AES256\n  61626364\n";
        let p = parse(src);
        let ks = keys(&p);
        assert_eq!(ks.len(), 1);
        assert_eq!(ks[0].value, VAULT_SENTINEL);
        for f in PatternFn::ALL {
            assert!(!f.matches(VAULT_SENTINEL), "{f:?} must not match the sentinel");
        }
    }

    #[test]
    fn comments_are_line_scanned() {
        let src = "\
# full line comment
key: value  # trailing note
quoted: \"not # a comment\"
single: 'also # kept'
plain: foo#bar
#
#
url: \"http://x/#frag\"  # after quotes
";
        let p = parse(src);
        let comments: Vec<(usize, &str)> = p
            .stream
            .tokens
            .iter()
            .filter(|t| t.kind == TokenKind::Comment)
            .map(|t| (t.line, t.value.as_str()))
            .collect();
        assert_eq!(
            comments,
            vec![(1, "full line comment"), (2, "trailing note"), (8, "after quotes")]
        );
    }

    #[test]
    fn comment_tokens_have_empty_names_and_columns_set() {
        let p = parse("key: v # note\n");
        let c = p.stream.tokens.iter().find(|t| t.kind == TokenKind::Comment).unwrap();
        assert_eq!(c.name, "");
        assert_eq!(c.column, 7);
    }

    #[test]
    fn malformed_yaml_keeps_comments_only() {
        let src = "# header note\nkey: \"unterminated\nother: [1,\n";
        let p = parse(src);
        assert!(p.status.is_malformed());
        assert_eq!(p.stream.loc, 3);
        assert_eq!(p.stream.tokens.len(), 1);
        assert_eq!(p.stream.tokens[0].kind, TokenKind::Comment);
        assert_eq!(p.stream.tokens[0].value, "header note");
    }

    #[test]
    fn multiple_documents_are_traversed() {
        let src = "---\na: 1\n---\nb: 2\n";
        let p = parse(src);
        assert_eq!(p.status, ParseStatus::Parsed);
        let names: Vec<&str> = keys(&p).iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, vec!["a", "b"]);
    }

    #[test]
    fn duplicate_keys_produce_two_tokens() {
        let p = parse("user: a\nuser: b\n");
        assert_eq!(keys(&p).len(), 2);
    }

    #[test]
    fn aliases_and_non_scalar_values_emit_no_tokens() {
        let src = "base: &b shared\ncopy: *b\nlist:\n  - 1\n  - 2\n";
        let p = parse(src);
        let got: Vec<&str> = keys(&p).iter().map(|t| t.name.as_str()).collect();
        assert_eq!(got, vec!["base"]);
    }

    #[test]
    fn sequence_element_mappings_open_fresh_blocks() {
        let src = "\
- hosts: all
  vars:
    password: \"\"
  tasks:
    - get_url:
        url: http://a/b.tar.gz
        checksum: sha256:beef
    - get_url:
        url: http://a/c.tar.gz
";
        let p = parse(src);
        let find = |name: &str, line: usize| {
            keys(&p).iter().find(|t| t.name == name && t.line == line).map(|t| t.block).unwrap()
        };
        let play_block = find("hosts", 1);
        assert_eq!(find("password", 3), play_block, "vars mapping inherits the play block");
        let task1 = find("url", 6);
        let task2 = find("url", 9);
        assert_eq!(find("checksum", 7), task1, "siblings within a task share a block");
        assert_ne!(task1, task2, "separate tasks get separate blocks");
        assert_ne!(play_block, task1);
    }

    #[test]
    fn flow_collections_parse_like_block_collections() {
        let p = parse("cfg: {user: root, port: 22}\nitems: [a, b]\n");
        let got: Vec<(String, Vec<String>)> =
            keys(&p).iter().map(|t| (t.name.clone(), t.key_path.clone())).collect();
        assert_eq!(
            got,
            vec![
                ("user".into(), vec!["cfg".into()]),
                ("port".into(), vec!["cfg".into()]),
            ]
        );
    }

    #[test]
    fn complex_keys_are_consumed_silently() {
        let p = parse("? [a, b]\n: value\nplain: 1\n");
        assert_eq!(p.status, ParseStatus::Parsed);
        let got: Vec<&str> = keys(&p).iter().map(|t| t.name.as_str()).collect();
        assert_eq!(got, vec!["plain"]);
    }

    /// Independent traversal over the tree API: counts mapping entries whose
    /// key and value are both scalars.
    fn naive_scalar_entry_count(node: &Yaml) -> usize {
        match node {
            Yaml::Hash(h) => h
                .iter()
                .map(|(k, v)| match v {
                    Yaml::Hash(_) | Yaml::Array(_) => naive_scalar_entry_count(v),
                    _ => usize::from(!matches!(k, Yaml::Hash(_) | Yaml::Array(_))),
                })
                .sum(),
            Yaml::Array(a) => a.iter().map(naive_scalar_entry_count).sum(),
            _ => 0,
        }
    }

    #[test]
    fn key_token_count_matches_naive_traversal() {
        let fixtures = [
            "- hosts: all\n  vars:\n    a: 1\n    b: {c: 2, d: [x, {e: 3}]}\n  tasks:\n    - shell: echo\n",
            "a: 1\nb:\n  - 1\n  - c: 2\n",
            "---\na: 1\n---\n- b: 2\n- c: ~\n",
            "empty:\nquoted: \"\"\nnum: 7\n",
        ];
        for src in fixtures {
            let docs = YamlLoader::load_from_str(src).unwrap();
            let want: usize = docs.iter().map(naive_scalar_entry_count).sum();
            let p = parse(src);
            assert_eq!(keys(&p).len(), want, "{src:?}");
        }
    }

    proptest::proptest! {
        /// Parsing is deterministic and returns sorted tokens within loc.
        #[test]
        fn parse_is_deterministic_and_ordered(
            parts in proptest::collection::vec(
                proptest::sample::select(vec![
                    "- hosts: all\n", "  vars:\n", "    a: 1\n", "    password: \"\"\n",
                    "# note todo\n", "key: value # tail\n", "  tasks:\n",
                    "    - shell: echo hi\n", "x: [1, 2]\n", "y: {a: b}\n",
                    "bad: \"unterminated\n", "\t\n", "z: yes\n",
                ]),
                0..10,
            )
        ) {
            let src: String = parts.concat();
            let p1 = parse_ansible(&src, &PathBuf::from("a.yml"));
            let p2 = parse_ansible(&src, &PathBuf::from("a.yml"));
            proptest::prop_assert_eq!(&p1, &p2);
            proptest::prop_assert_eq!(p1.stream.loc, src.lines().count());
            let sorted = p1.stream.tokens.windows(2).all(|w| (w[0].line, w[0].column) <= (w[1].line, w[1].column));
            proptest::prop_assert!(sorted);
            for t in &p1.stream.tokens {
                proptest::prop_assert!(t.line >= 1 && t.line <= p1.stream.loc.max(1));
            }
        }
    }
}
