//! Core data model: script dialects, the security smell catalog with CWE
//! mappings, lexical tokens produced by the parsers, and reported occurrences.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Scripting language a file is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    Ansible,
    Chef,
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dialect::Ansible => write!(f, "ansible"),
            Dialect::Chef => write!(f, "chef"),
        }
    }
}

/// Identifier of a security smell category.
///
/// The declaration order is the canonical catalog order used for report
/// columns and summary tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SmellId {
    AdminByDefault,
    EmptyPassword,
    HardCodedSecret,
    MissingDefaultInCase,
    NoIntegrityCheck,
    SuspiciousComment,
    UnrestrictedIpAddress,
    HttpWithoutTls,
    WeakCrypto,
}

impl SmellId {
    /// Every smell in catalog order.
    pub const ALL: [SmellId; 9] = [
        SmellId::AdminByDefault,
        SmellId::EmptyPassword,
        SmellId::HardCodedSecret,
        SmellId::MissingDefaultInCase,
        SmellId::NoIntegrityCheck,
        SmellId::SuspiciousComment,
        SmellId::UnrestrictedIpAddress,
        SmellId::HttpWithoutTls,
        SmellId::WeakCrypto,
    ];

    /// Stable machine-readable identifier (also used as report column name).
    pub fn as_str(self) -> &'static str {
        match self {
            SmellId::AdminByDefault => "ADMIN_BY_DEFAULT",
            SmellId::EmptyPassword => "EMPTY_PASSWORD",
            SmellId::HardCodedSecret => "HARD_CODED_SECRET",
            SmellId::MissingDefaultInCase => "MISSING_DEFAULT_IN_CASE",
            SmellId::NoIntegrityCheck => "NO_INTEGRITY_CHECK",
            SmellId::SuspiciousComment => "SUSPICIOUS_COMMENT",
            SmellId::UnrestrictedIpAddress => "UNRESTRICTED_IP_ADDRESS",
            SmellId::HttpWithoutTls => "HTTP_WITHOUT_TLS",
            SmellId::WeakCrypto => "WEAK_CRYPTO",
        }
    }

    /// Human-readable name used in summary tables.
    pub fn display_name(self) -> &'static str {
        match self {
            SmellId::AdminByDefault => "Admin by default",
            SmellId::EmptyPassword => "Empty password",
            SmellId::HardCodedSecret => "Hard-coded secret",
            SmellId::MissingDefaultInCase => "Missing default in case statement",
            SmellId::NoIntegrityCheck => "No integrity check",
            SmellId::SuspiciousComment => "Suspicious comment",
            SmellId::UnrestrictedIpAddress => "Unrestricted IP address",
            SmellId::HttpWithoutTls => "Use of HTTP without TLS",
            SmellId::WeakCrypto => "Use of weak cryptography algorithms",
        }
    }
}

impl fmt::Display for SmellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A Common Weakness Enumeration identifier, e.g. `CWE-798`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cwe(pub u16);

impl fmt::Display for Cwe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CWE-{}", self.0)
    }
}

impl Serialize for Cwe {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Catalog entry describing one smell category.
#[derive(Debug, Clone, Serialize)]
pub struct SmellDefinition {
    pub id: SmellId,
    /// Dialects whose rule set can raise this smell.
    pub dialects: &'static [Dialect],
    /// Associated weakness identifiers.
    pub cwe_ids: &'static [Cwe],
    /// One-sentence description of the insecure practice.
    pub description: &'static str,
}

const BOTH: &[Dialect] = &[Dialect::Ansible, Dialect::Chef];
const ANSIBLE_ONLY: &[Dialect] = &[Dialect::Ansible];
const CHEF_ONLY: &[Dialect] = &[Dialect::Chef];

static CATALOG: [SmellDefinition; 9] = [
    SmellDefinition {
        id: SmellId::AdminByDefault,
        dialects: CHEF_ONLY,
        cwe_ids: &[Cwe(250)],
        description: "Default configuration grants administrative privileges",
    },
    SmellDefinition {
        id: SmellId::EmptyPassword,
        dialects: ANSIBLE_ONLY,
        cwe_ids: &[Cwe(258)],
        description: "Password variable assigned a zero-length string",
    },
    SmellDefinition {
        id: SmellId::HardCodedSecret,
        dialects: BOTH,
        cwe_ids: &[Cwe(798), Cwe(259)],
        description: "User name, password, or private key stored as plain text",
    },
    SmellDefinition {
        id: SmellId::MissingDefaultInCase,
        dialects: CHEF_ONLY,
        cwe_ids: &[Cwe(478)],
        description: "Case statement lacks an else branch for unexpected input",
    },
    SmellDefinition {
        id: SmellId::NoIntegrityCheck,
        dialects: BOTH,
        cwe_ids: &[Cwe(353)],
        description: "Artifact downloaded without checksum or signature verification",
    },
    SmellDefinition {
        id: SmellId::SuspiciousComment,
        dialects: BOTH,
        cwe_ids: &[Cwe(546)],
        description: "Comment signals defects or missing functionality",
    },
    SmellDefinition {
        id: SmellId::UnrestrictedIpAddress,
        dialects: BOTH,
        cwe_ids: &[Cwe(284)],
        description: "Service bound to 0.0.0.0, exposing it on every interface",
    },
    SmellDefinition {
        id: SmellId::HttpWithoutTls,
        dialects: BOTH,
        cwe_ids: &[Cwe(319)],
        description: "Plain HTTP used where transport encryption is expected",
    },
    SmellDefinition {
        id: SmellId::WeakCrypto,
        dialects: CHEF_ONLY,
        cwe_ids: &[Cwe(327), Cwe(326)],
        description: "Broken digest algorithm (MD5/SHA-1) selected for a security function",
    },
];

/// Full smell catalog in canonical order.
pub fn smell_catalog_all() -> &'static [SmellDefinition] {
    &CATALOG
}

/// Smell definitions applicable to `dialect`, in catalog order.
pub fn smell_catalog(dialect: Dialect) -> Vec<&'static SmellDefinition> {
    CATALOG.iter().filter(|d| d.dialects.contains(&dialect)).collect()
}

/// Look up one catalog entry.
pub fn smell_definition(id: SmellId) -> &'static SmellDefinition {
    &CATALOG[SmellId::ALL.iter().position(|s| *s == id).expect("catalog covers all ids")]
}

/// Weakness identifiers associated with a smell.
pub fn cwe_for(id: SmellId) -> &'static [Cwe] {
    smell_definition(id).cwe_ids
}

/// Kind of lexical token extracted from a script.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TokenKind {
    /// Comment text (both dialects).
    Comment,
    /// Ansible key/value mapping entry.
    Key,
    /// Chef local or instance variable assignment.
    Variable,
    /// Chef resource property or hash entry.
    Property,
    /// Chef node attribute assignment.
    Attribute,
    /// Chef resource declaration.
    Resource,
    /// Chef case statement.
    CaseStmt,
}

/// One lexical token with enough position and context for rule evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    /// Key / variable / property / attribute / resource name; empty for comments.
    pub name: String,
    /// Assigned or embedded text value (comment body for comments).
    pub value: String,
    /// 1-based source line.
    pub line: usize,
    /// 0-based column, used only for stable ordering within a line.
    pub column: usize,
    /// Enclosing key names for nested Ansible structures, outermost first.
    /// List elements are traversed transparently and contribute no segment.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub key_path: Vec<String>,
    /// Whether a case statement carries an else branch (CASE_STMT only).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub else_branch_present: bool,
    /// Whether a Chef attribute was assigned through a `default` root.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub is_default_attribute: bool,
    /// Identifier of the enclosing block (Ansible task / Chef resource body /
    /// file level). Tokens share a block id exactly when the sibling-scoped
    /// rules should see them together.
    #[serde(default)]
    pub block: usize,
}

impl Token {
    /// Token with the common fields set and the dialect-specific flags off.
    pub fn new(kind: TokenKind, name: impl Into<String>, value: impl Into<String>, line: usize) -> Token {
        Token {
            kind,
            name: name.into(),
            value: value.into(),
            line,
            column: 0,
            key_path: Vec::new(),
            else_branch_present: false,
            is_default_attribute: false,
            block: 0,
        }
    }
}

/// Parsed view of one script: its tokens in source order plus size metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    /// Path of the script the tokens were read from.
    pub script: PathBuf,
    pub dialect: Dialect,
    /// Tokens ordered by (line, column).
    pub tokens: Vec<Token>,
    /// Total number of lines in the source.
    pub loc: usize,
}

/// Whether a script parsed cleanly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum ParseStatus {
    Parsed,
    /// Source could not be fully parsed; the stream carries whatever could be
    /// recovered (at least line-scanned comments).
    Malformed { message: String },
}

impl ParseStatus {
    pub fn is_malformed(&self) -> bool {
        matches!(self, ParseStatus::Malformed { .. })
    }
}

/// Result of parsing one script: recovered tokens plus the parse status.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedScript {
    pub stream: TokenStream,
    pub status: ParseStatus,
}

/// Finer classification of a hard-coded secret.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SecretSubtype {
    /// Private keys, certificates, and similar key material.
    Key,
    /// Hard-coded user names.
    Username,
    /// Hard-coded passwords.
    Password,
}

impl fmt::Display for SecretSubtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SecretSubtype::Key => write!(f, "key"),
            SecretSubtype::Username => write!(f, "username"),
            SecretSubtype::Password => write!(f, "password"),
        }
    }
}

/// Maximum length of an occurrence snippet, in characters.
pub const SNIPPET_MAX_CHARS: usize = 200;

/// One detected smell instance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Occurrence {
    pub script: PathBuf,
    pub smell: SmellId,
    /// 1-based line of the offending token.
    pub line: usize,
    /// Reconstructed source context, truncated to [`SNIPPET_MAX_CHARS`].
    pub snippet: String,
    /// Set only for hard-coded secrets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret_subtype: Option<SecretSubtype>,
}

/// Truncate `text` to at most [`SNIPPET_MAX_CHARS`] characters, respecting
/// char boundaries.
pub fn truncate_snippet(text: &str) -> String {
    if text.chars().count() <= SNIPPET_MAX_CHARS {
        return text.to_string();
    }
    text.chars().take(SNIPPET_MAX_CHARS).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_sizes_per_dialect() {
        assert_eq!(smell_catalog_all().len(), 9);
        assert_eq!(smell_catalog(Dialect::Ansible).len(), 6);
        assert_eq!(smell_catalog(Dialect::Chef).len(), 8);
    }

    #[test]
    fn catalog_intersection_is_the_five_shared_smells() {
        let ansible: Vec<SmellId> = smell_catalog(Dialect::Ansible).iter().map(|d| d.id).collect();
        let chef: Vec<SmellId> = smell_catalog(Dialect::Chef).iter().map(|d| d.id).collect();
        let shared: Vec<SmellId> = ansible.iter().copied().filter(|id| chef.contains(id)).collect();
        assert_eq!(
            shared,
            vec![
                SmellId::HardCodedSecret,
                SmellId::NoIntegrityCheck,
                SmellId::SuspiciousComment,
                SmellId::UnrestrictedIpAddress,
                SmellId::HttpWithoutTls,
            ]
        );
    }

    #[test]
    fn catalog_is_in_declaration_order_and_complete() {
        let ids: Vec<SmellId> = smell_catalog_all().iter().map(|d| d.id).collect();
        assert_eq!(ids, SmellId::ALL.to_vec());
    }

    #[test]
    fn cwe_assignments() {
        let cases: [(SmellId, &[u16]); 9] = [
            (SmellId::AdminByDefault, &[250]),
            (SmellId::EmptyPassword, &[258]),
            (SmellId::HardCodedSecret, &[798, 259]),
            (SmellId::MissingDefaultInCase, &[478]),
            (SmellId::NoIntegrityCheck, &[353]),
            (SmellId::SuspiciousComment, &[546]),
            (SmellId::UnrestrictedIpAddress, &[284]),
            (SmellId::HttpWithoutTls, &[319]),
            (SmellId::WeakCrypto, &[327, 326]),
        ];
        for (id, want) in cases {
            let got: Vec<u16> = cwe_for(id).iter().map(|c| c.0).collect();
            assert_eq!(got, want, "{id}");
        }
    }

    #[test]
    fn cwe_display_format() {
        assert_eq!(Cwe(798).to_string(), "CWE-798");
    }

    #[test]
    fn smell_id_round_trip_serde() {
        for id in SmellId::ALL {
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.as_str()));
            let back: SmellId = serde_json::from_str(&json).unwrap();
            assert_eq!(back, id);
        }
    }

    #[test]
    fn snippet_truncation_and_identity() {
        assert_eq!(truncate_snippet("short"), "short");
        let long: String = "x".repeat(500);
        assert_eq!(truncate_snippet(&long).chars().count(), SNIPPET_MAX_CHARS);
        // Multi-byte chars must not be split.
        let wide: String = "é".repeat(300);
        let cut = truncate_snippet(&wide);
        assert_eq!(cut.chars().count(), SNIPPET_MAX_CHARS);
    }
}
