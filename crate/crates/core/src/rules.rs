//! Detection rules: maps token streams to smell occurrences.
//!
//! Each dialect has a fixed rule set over its token kinds. A rule fires at
//! most once per token, and duplicate findings (same smell, line, and
//! snippet) collapse to one occurrence. The full rule catalog, including the
//! exact pattern semantics, is documented in `docs/rules.md`.

use std::collections::HashSet;

use crate::ansible::VAULT_SENTINEL;
use crate::model::{
    truncate_snippet, Dialect, Occurrence, SecretSubtype, SmellId, Token, TokenKind, TokenStream,
};
use crate::patterns::PatternFn;

/// Values that negate an integrity control (`gpgcheck: no` disables the
/// check rather than providing one). Compared case-insensitively after
/// trimming; an empty value provides no check either.
const NEGATIVE_VALUES: [&str; 3] = ["false", "no", "0"];

/// Whether a token provides integrity-check evidence for its block: its name
/// names an integrity control and its value does not switch the control off.
fn provides_integrity_evidence(token: &Token) -> bool {
    if token.name.is_empty() || !PatternFn::IsIntegrityCheck.matches(&token.name) {
        return false;
    }
    let value = token.value.trim();
    !value.is_empty() && !NEGATIVE_VALUES.iter().any(|n| value.eq_ignore_ascii_case(n))
}

/// Whether a value is concrete text an author hard-coded: non-empty and not
/// the vault sentinel standing in for encrypted content.
fn hard_codeable(value: &str) -> bool {
    !value.is_empty() && value != VAULT_SENTINEL
}

/// Words marking key material in a name, used to subtype secrets beyond the
/// strict private-key pattern (which requires a `pvt`/`priv` qualifier).
const KEY_WORDS: [&str; 5] = ["key", "rsa", "cert", "ssl", "secret"];

/// Subtype of the secret a hard-coded-secret token holds, decided by its
/// name: key material first, then passwords, then user names.
pub fn classify_secret(token: &Token) -> SecretSubtype {
    let lower = token.name.to_lowercase();
    if PatternFn::IsPvtKey.matches(&token.name) || KEY_WORDS.iter().any(|w| lower.contains(w)) {
        return SecretSubtype::Key;
    }
    if PatternFn::IsPassword.matches(&token.name) {
        return SecretSubtype::Password;
    }
    SecretSubtype::Username
}

/// Whether a name marks a credential holder (user, password, or private
/// key), the precondition for the hard-coded-secret rule.
fn names_secret(name: &str) -> bool {
    PatternFn::IsUser.matches(name)
        || PatternFn::IsPassword.matches(name)
        || PatternFn::IsPvtKey.matches(name)
}

/// Reconstruct a bug-report-sized source context for a token.
fn snippet(token: &Token) -> String {
    let text = match token.kind {
        TokenKind::Comment => format!("# {}", token.value),
        TokenKind::Key => format!("{}: {}", token.name, token.value),
        TokenKind::Variable | TokenKind::Attribute => format!("{} = {}", token.name, token.value),
        TokenKind::Property | TokenKind::Resource => format!("{} {}", token.name, token.value),
        TokenKind::CaseStmt => format!("case {}", token.value),
    };
    truncate_snippet(&text)
}

/// Run the dialect's rule set over every token of `stream`.
///
/// Occurrences come back ordered by token position, then rule catalog order,
/// with exact duplicates removed.
pub fn detect(stream: &TokenStream) -> Vec<Occurrence> {
    let evidence: HashSet<usize> = stream
        .tokens
        .iter()
        .filter(|t| provides_integrity_evidence(t))
        .map(|t| t.block)
        .collect();

    let mut occurrences = Vec::new();
    let mut seen: HashSet<(SmellId, usize, String)> = HashSet::new();
    for token in &stream.tokens {
        let smells = match stream.dialect {
            Dialect::Ansible => ansible_rules(token, &evidence),
            Dialect::Chef => chef_rules(token, &evidence),
        };
        for smell in smells {
            let snippet = snippet(token);
            if !seen.insert((smell, token.line, snippet.clone())) {
                continue;
            }
            occurrences.push(Occurrence {
                script: stream.script.clone(),
                smell,
                line: token.line,
                snippet,
                secret_subtype: (smell == SmellId::HardCodedSecret).then(|| classify_secret(token)),
            });
        }
    }
    occurrences
}

/// Smells raised by one Ansible token, in catalog order.
fn ansible_rules(token: &Token, evidence: &HashSet<usize>) -> Vec<SmellId> {
    let mut out = Vec::new();
    match token.kind {
        TokenKind::Comment => {
            if PatternFn::HasWrongWord.matches(&token.value) || PatternFn::HasBugInfo.matches(&token.value) {
                out.push(SmellId::SuspiciousComment);
            }
        }
        TokenKind::Key => {
            if token.value.is_empty() && PatternFn::IsPassword.matches(&token.name) {
                out.push(SmellId::EmptyPassword);
            }
            if hard_codeable(&token.value) && names_secret(&token.name) {
                out.push(SmellId::HardCodedSecret);
            }
            if PatternFn::IsDownload.matches(&token.value) && !evidence.contains(&token.block) {
                out.push(SmellId::NoIntegrityCheck);
            }
            if PatternFn::IsInvalidBind.matches(&token.value) {
                out.push(SmellId::UnrestrictedIpAddress);
            }
            if PatternFn::IsHttp.matches(&token.value) {
                out.push(SmellId::HttpWithoutTls);
            }
        }
        _ => {}
    }
    out
}

/// Smells raised by one Chef token, in catalog order.
fn chef_rules(token: &Token, evidence: &HashSet<usize>) -> Vec<SmellId> {
    let mut out = Vec::new();
    if token.is_default_attribute
        && PatternFn::IsAdmin.matches(&token.value)
        && (PatternFn::IsUser.matches(&token.name) || PatternFn::IsRole.matches(&token.name))
    {
        out.push(SmellId::AdminByDefault);
    }
    match token.kind {
        TokenKind::Comment => {
            if PatternFn::HasWrongWord.matches(&token.value) || PatternFn::HasBugInfo.matches(&token.value) {
                out.push(SmellId::SuspiciousComment);
            }
        }
        TokenKind::Variable | TokenKind::Property => {
            if hard_codeable(&token.value) && names_secret(&token.name) {
                out.push(SmellId::HardCodedSecret);
            }
            if token.kind == TokenKind::Property
                && PatternFn::IsDownload.matches(&token.value)
                && !evidence.contains(&token.block)
            {
                out.push(SmellId::NoIntegrityCheck);
            }
            if PatternFn::IsInvalidBind.matches(&token.value) {
                out.push(SmellId::UnrestrictedIpAddress);
            }
            if PatternFn::IsHttp.matches(&token.value) {
                out.push(SmellId::HttpWithoutTls);
            }
        }
        TokenKind::Attribute => {
            if PatternFn::IsDownload.matches(&token.value) && !evidence.contains(&token.block) {
                out.push(SmellId::NoIntegrityCheck);
            }
            if PatternFn::UsesWeakAlgo.matches(&token.value) {
                out.push(SmellId::WeakCrypto);
            }
        }
        TokenKind::CaseStmt => {
            if !token.else_branch_present {
                out.push(SmellId::MissingDefaultInCase);
            }
        }
        _ => {}
    }
    // Keep catalog order even though admin-by-default was checked first.
    out.sort_by_key(|s| SmellId::ALL.iter().position(|x| x == s));
    out
}
