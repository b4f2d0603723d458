//! Quoted-string escapes shared by the model and mapping formats.
//!
//! One layer only: `\` before punctuation yields that character, `\n` `\t`
//! `\r` yield controls. Whatever survives (including backslashes written as
//! `\\`) is the literal text of a delimiter or the source of a pattern.

/// Unescapes string body text (without the surrounding quotes).
/// On failure returns the byte offset into `raw` and a message.
pub fn unescape(raw: &str) -> Result<String, (usize, String)> {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.char_indices();
    while let Some((i, c)) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            None => return Err((i, "trailing backslash".to_string())),
            Some((_, 'n')) => out.push('\n'),
            Some((_, 't')) => out.push('\t'),
            Some((_, 'r')) => out.push('\r'),
            Some((_, c)) if c.is_ascii_punctuation() => out.push(c),
            Some((j, c)) => return Err((j, format!("unknown escape `\\{c}`"))),
        }
    }
    Ok(out)
}

/// Quotes text so that `unescape` of the body gives it back.
pub fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unescape_resolves_one_layer() {
        assert_eq!(unescape("ab").unwrap(), "ab");
        assert_eq!(unescape("\\[").unwrap(), "[");
        assert_eq!(unescape("\\\\d").unwrap(), "\\d");
        assert_eq!(unescape("a\\nb").unwrap(), "a\nb");
        assert_eq!(unescape("\\\"").unwrap(), "\"");
    }

    #[test]
    fn unescape_rejects_bad_escapes() {
        assert!(unescape("\\").is_err());
        assert!(unescape("\\q").is_err());
        assert_eq!(unescape("ab\\").unwrap_err().0, 2);
    }

    #[test]
    fn quote_round_trips() {
        for text in ["", "plain", "a\"b", "back\\slash", "tab\there", "[0-9]+\\|x"] {
            let quoted = quote(text);
            let body = &quoted[1..quoted.len() - 1];
            assert_eq!(unescape(body).unwrap(), text, "through {quoted}");
        }
    }
}
