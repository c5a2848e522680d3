//! String pattern functions used by the detection rules.
//!
//! Every function is case-insensitive. Keyword patterns use substring
//! matching; [`PatternFn::HasWrongWord`] matches whole words only, and
//! [`PatternFn::HasBugInfo`] / [`PatternFn::IsDownload`] implement small
//! hand-rolled scanners so the engine carries no regex dependency (the test
//! suite cross-checks them against a regex engine).

/// Named pattern predicates applied to token names and values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternFn {
    /// Comment text references a bug tracker entry (`bug #123`,
    /// `show_bug.cgi?id=123`).
    HasBugInfo,
    /// Comment text contains a defect-signaling word (`bug`, `hack`, `fixme`,
    /// `later`, `later2`, `todo`) as a whole word.
    HasWrongWord,
    /// Subject mentions `admin`.
    IsAdmin,
    /// Subject embeds a URL pointing at a downloadable artifact
    /// (`.dmg`, `.rpm`, `.tar.gz`, `.tgz`, `.zip`, `.tar`).
    IsDownload,
    /// Subject contains `http:`.
    IsHttp,
    /// Subject contains the bind-all address `0.0.0.0`.
    IsInvalidBind,
    /// Subject names an integrity control (`gpgcheck`, `check_sha`,
    /// `checksum`, `checksha`).
    IsIntegrityCheck,
    /// Subject names a password (`pwd`, `pass`, `password`).
    IsPassword,
    /// Subject names private key material (`pvt`/`priv` combined with
    /// `cert`/`key`/`rsa`/`secret`/`ssl`).
    IsPvtKey,
    /// Subject mentions `role`.
    IsRole,
    /// Subject mentions `user`.
    IsUser,
    /// Subject selects a broken digest algorithm (`md5`, `sha1`).
    UsesWeakAlgo,
}

impl PatternFn {
    /// All pattern functions, in catalog order.
    pub const ALL: [PatternFn; 12] = [
        PatternFn::HasBugInfo,
        PatternFn::HasWrongWord,
        PatternFn::IsAdmin,
        PatternFn::IsDownload,
        PatternFn::IsHttp,
        PatternFn::IsInvalidBind,
        PatternFn::IsIntegrityCheck,
        PatternFn::IsPassword,
        PatternFn::IsPvtKey,
        PatternFn::IsRole,
        PatternFn::IsUser,
        PatternFn::UsesWeakAlgo,
    ];

    /// Evaluate the pattern against `subject`, ignoring case.
    pub fn matches(self, subject: &str) -> bool {
        let lower = subject.to_lowercase();
        match self {
            PatternFn::HasBugInfo => has_bug_info(&lower),
            PatternFn::HasWrongWord => WRONG_WORDS.iter().any(|w| contains_word(&lower, w)),
            PatternFn::IsAdmin => lower.contains("admin"),
            PatternFn::IsDownload => is_download(&lower),
            PatternFn::IsHttp => lower.contains("http:"),
            PatternFn::IsInvalidBind => lower.contains("0.0.0.0"),
            PatternFn::IsIntegrityCheck => contains_any(&lower, &["gpgcheck", "check_sha", "checksum", "checksha"]),
            PatternFn::IsPassword => contains_any(&lower, &["pwd", "pass", "password"]),
            PatternFn::IsPvtKey => {
                contains_any(&lower, &["pvt", "priv"])
                    && contains_any(&lower, &["cert", "key", "rsa", "secret", "ssl"])
            }
            PatternFn::IsRole => lower.contains("role"),
            PatternFn::IsUser => lower.contains("user"),
            PatternFn::UsesWeakAlgo => contains_any(&lower, &["md5", "sha1"]),
        }
    }
}

const WRONG_WORDS: [&str; 6] = ["bug", "hack", "fixme", "later", "later2", "todo"];

fn contains_any(lower: &str, needles: &[&str]) -> bool {
    needles.iter().any(|n| lower.contains(n))
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Substring match with word boundaries on both sides.
fn contains_word(lower: &str, word: &str) -> bool {
    let mut search = 0;
    while let Some(pos) = lower[search..].find(word) {
        let at = search + pos;
        let end = at + word.len();
        let before_ok = !lower[..at].chars().next_back().is_some_and(is_word_char);
        let after_ok = !lower[end..].chars().next().is_some_and(is_word_char);
        if before_ok && after_ok {
            return true;
        }
        search = at + 1;
    }
    false
}

/// `bug` optionally separated by `#`, tab, or space from a number, or a
/// Bugzilla-style `show_bug.cgi?id=<number>` reference.
fn has_bug_info(lower: &str) -> bool {
    let bytes = lower.as_bytes();
    let mut search = 0;
    while let Some(pos) = lower[search..].find("bug") {
        let at = search + pos;
        let mut i = at + 3;
        while i < bytes.len() && matches!(bytes[i], b'#' | b'\t' | b' ') {
            i += 1;
        }
        if i < bytes.len() && bytes[i].is_ascii_digit() {
            return true;
        }
        search = at + 1;
    }
    const TRACKER: &str = "show_bug.cgi?id=";
    let mut search = 0;
    while let Some(pos) = lower[search..].find(TRACKER) {
        let digits_at = search + pos + TRACKER.len();
        if bytes.get(digits_at).is_some_and(u8::is_ascii_digit) {
            return true;
        }
        search = search + pos + 1;
    }
    false
}

/// Archive file extensions that mark a URL as a package download.
const DOWNLOAD_EXTS: [&str; 6] = [".dmg", ".rpm", ".tar.gz", ".tgz", ".zip", ".tar"];

/// Characters allowed inside the URL body: `!`, the ASCII range `$`..`_`
/// (digits, punctuation, uppercase letters), and lowercase letters. Space,
/// `#`, and quotes terminate the URL.
fn is_url_byte(b: u8) -> bool {
    b == b'!' || (0x24..=0x5f).contains(&b) || b.is_ascii_lowercase()
}

/// `http://` or `https://` followed by a URL body that reaches one of the
/// archive extensions after at least one body character.
fn is_download(lower: &str) -> bool {
    let bytes = lower.as_bytes();
    let mut search = 0;
    while let Some(pos) = lower[search..].find("http") {
        let at = search + pos;
        let rest = &lower[at + 4..];
        let scheme_len = if rest.starts_with("://") {
            7
        } else if rest.starts_with("s://") {
            8
        } else {
            search = at + 1;
            continue;
        };
        let run_start = at + scheme_len;
        let mut run_end = run_start;
        while run_end < bytes.len() && is_url_byte(bytes[run_end]) {
            run_end += 1;
        }
        let run = &lower[run_start..run_end];
        // The extension dot must come after at least one URL character, so
        // only occurrences from offset 1 onward count.
        if run.len() > 1 && DOWNLOAD_EXTS.iter().any(|ext| run[1..].contains(ext)) {
            return true;
        }
        search = at + 1;
    }
    false
}
