//! Pattern-based import of Selenium-style Java test classes.
//!
//! No Java grammar is involved: `@Test` methods are located by regex and each
//! `;`-terminated statement in the body is reduced to an action, a locator
//! (`By.<kind>("<value>")` becomes `<kind>=<value>`) and its remaining string
//! literals.

use std::sync::OnceLock;

use regex::Regex;

use super::{Statement, TestCase, TestSuite};
use crate::error::ParseError;

fn method_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"@Test\b[^{;]*?\bvoid\s+([A-Za-z][A-Za-z0-9_]*)\s*\([^)]*\)[^{]*\{").unwrap()
    })
}

fn literal_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#""((?:[^"\\]|\\.)*)""#).unwrap())
}

fn locator_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"By\.(\w+)\(\s*"((?:[^"\\]|\\.)*)"\s*\)"#).unwrap())
}

fn call_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\.?([A-Za-z_][A-Za-z0-9_]*)\s*\(").unwrap())
}

fn unescape(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

/// Returns the body of the block whose opening brace ends at `start`.
fn block_body(source: &str, start: usize) -> &str {
    let mut depth = 1usize;
    let mut in_string = false;
    let mut escaped = false;
    for (offset, c) in source[start..].char_indices() {
        if in_string {
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return &source[start..start + offset];
                }
            }
            _ => {}
        }
    }
    &source[start..]
}

/// Splits on `;` outside string literals.
fn split_statements(body: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut begin = 0;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in body.char_indices() {
        if in_string {
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            ';' => {
                out.push(body[begin..i].trim());
                begin = i + 1;
            }
            _ => {}
        }
    }
    out
}

fn import_statement(chunk: &str) -> Option<Statement> {
    let mut locator = String::from("-");
    let mut locator_span = None;
    if let Some(caps) = locator_re().captures(chunk) {
        locator = format!("{}={}", &caps[1], unescape(&caps[2]));
        locator_span = Some(caps.get(0).unwrap().range());
    }

    let calls: Vec<_> = call_re().captures_iter(chunk).collect();
    let first = calls.first()?;
    let first_name = &first[1];
    let action = if first_name.starts_with("assert") {
        first_name.to_string()
    } else {
        calls.last()?[1].to_string()
    };

    let args = literal_re()
        .captures_iter(chunk)
        .filter(|caps| {
            let range = caps.get(0).unwrap().range();
            locator_span
                .as_ref()
                .is_none_or(|span| range.end <= span.start || range.start >= span.end)
        })
        .map(|caps| unescape(&caps[1]))
        .collect();

    Some(Statement::new(action, locator, args))
}

/// Extracts `(action, locator, literals)` triples from Java-like test sources.
pub fn import_java(source: &str) -> Result<TestSuite, ParseError> {
    let mut tests = Vec::new();
    for caps in method_re().captures_iter(source) {
        let name = caps[1].to_string();
        let body = block_body(source, caps.get(0).unwrap().end());
        let statements = split_statements(body)
            .into_iter()
            .filter(|chunk| !chunk.is_empty())
            .filter_map(import_statement)
            .collect();
        tests.push(TestCase::new(name, statements));
    }
    TestSuite::new(tests)
}
