//! Test-suite model and the line DSL.
//!
//! ```text
//! # comment
//! TEST addUserTest
//!   sendKeys id=login "admin"
//!   click linkText=Platform administration
//!   assertText xpath=//*[@id='claroBody'] "The new user has been created"
//! ```
//!
//! The first token of a statement line is the action. The locator is the
//! remaining text up to the first double quote; it may contain spaces but not
//! quotes. Arguments are double-quoted literals with `\"`, `\\`, `\n` and `\t`
//! escapes. File order is the original execution order.

mod java;

pub use java::import_java;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::manifest::ActionCatalog;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub action: String,
    pub locator: String,
    pub args: Vec<String>,
}

impl Statement {
    pub fn new(action: impl Into<String>, locator: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            action: action.into(),
            locator: locator.into(),
            args,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub name: String,
    pub statements: Vec<Statement>,
}

impl TestCase {
    pub fn new(name: impl Into<String>, statements: Vec<Statement>) -> Self {
        Self {
            name: name.into(),
            statements,
        }
    }

    /// Every string literal appearing in the test's statement arguments.
    pub fn literals(&self) -> BTreeSet<&str> {
        self.statements
            .iter()
            .flat_map(|s| s.args.iter().map(String::as_str))
            .collect()
    }
}

/// An ordered test suite. Position `i` (0-based) is original order `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TestSuite {
    tests: Vec<TestCase>,
    index: HashMap<String, usize>,
}

/// Returns true when `name` matches `[A-Za-z][A-Za-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl TestSuite {
    /// Builds a suite, rejecting duplicate or malformed names. Reported line
    /// numbers are test positions (1-based).
    pub fn new(tests: Vec<TestCase>) -> Result<Self, ParseError> {
        let mut index = HashMap::with_capacity(tests.len());
        for (i, test) in tests.iter().enumerate() {
            if !is_identifier(&test.name) {
                return Err(ParseError::Syntax {
                    line: i + 1,
                    message: format!("invalid test name `{}`", test.name),
                });
            }
            if index.insert(test.name.clone(), i).is_some() {
                return Err(ParseError::DuplicateTestName {
                    line: i + 1,
                    name: test.name.clone(),
                });
            }
        }
        Ok(Self { tests, index })
    }

    pub fn tests(&self) -> &[TestCase] {
        &self.tests
    }

    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }

    /// 0-based position of a test in the original order.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn get(&self, name: &str) -> Option<&TestCase> {
        self.position(name).map(|i| &self.tests[i])
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tests.iter().map(|t| t.name.as_str())
    }

    /// Checks every statement action against a catalog.
    pub fn check_actions(&self, catalog: &ActionCatalog) -> Result<(), ParseError> {
        for (i, test) in self.tests.iter().enumerate() {
            for stmt in &test.statements {
                if !catalog.all_actions.contains(&stmt.action) {
                    return Err(ParseError::UnknownAction {
                        line: i + 1,
                        action: stmt.action.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Parses the line DSL. When a catalog is given, unknown actions are
/// rejected with the offending line.
pub fn parse_suite(source: &str, catalog: Option<&ActionCatalog>) -> Result<TestSuite, ParseError> {
    let mut tests: Vec<TestCase> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();

    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let (head, rest) = split_first_token(text);
        if head == "TEST" {
            let name = rest.trim();
            if !is_identifier(name) {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("invalid test name `{name}`"),
                });
            }
            if seen.insert(name.to_string(), line).is_some() {
                return Err(ParseError::DuplicateTestName {
                    line,
                    name: name.to_string(),
                });
            }
            tests.push(TestCase::new(name, Vec::new()));
            continue;
        }

        let Some(current) = tests.last_mut() else {
            return Err(ParseError::Syntax {
                line,
                message: "statement outside of a TEST block".into(),
            });
        };
        let stmt = parse_statement(head, rest, line)?;
        if let Some(catalog) = catalog {
            if !catalog.all_actions.contains(&stmt.action) {
                return Err(ParseError::UnknownAction {
                    line,
                    action: stmt.action,
                });
            }
        }
        current.statements.push(stmt);
    }

    TestSuite::new(tests)
}

fn split_first_token(text: &str) -> (&str, &str) {
    match text.find(char::is_whitespace) {
        Some(pos) => (&text[..pos], &text[pos..]),
        None => (text, ""),
    }
}

fn parse_statement(action: &str, rest: &str, line: usize) -> Result<Statement, ParseError> {
    let syntax = |message: String| ParseError::Syntax { line, message };
    if !is_identifier(action) {
        return Err(syntax(format!("invalid action `{action}`")));
    }
    let quote = rest.find('"').unwrap_or(rest.len());
    let locator = rest[..quote].trim();
    if locator.is_empty() {
        return Err(syntax(format!(
            "`{action}` is missing a locator (use `-` for none)"
        )));
    }

    let mut args = Vec::new();
    let mut chars = rest[quote..].chars().peekable();
    loop {
        while chars.next_if(|c| c.is_whitespace()).is_some() {}
        match chars.next() {
            None => break,
            Some('"') => {}
            Some(c) => return Err(syntax(format!("unexpected `{c}` between arguments"))),
        }
        let mut value = String::new();
        loop {
            match chars.next() {
                None => return Err(syntax("unterminated string literal".into())),
                Some('"') => break,
                Some('\\') => match chars.next() {
                    Some('"') => value.push('"'),
                    Some('\\') => value.push('\\'),
                    Some('n') => value.push('\n'),
                    Some('t') => value.push('\t'),
                    Some(c) => return Err(syntax(format!("unknown escape `\\{c}`"))),
                    None => return Err(syntax("unterminated string literal".into())),
                },
                Some(c) => value.push(c),
            }
        }
        if chars.peek().is_some_and(|c| !c.is_whitespace()) {
            return Err(syntax("arguments must be separated by whitespace".into()));
        }
        args.push(value);
    }

    Ok(Statement::new(action, locator, args))
}

fn write_literal(f: &mut fmt::Formatter<'_>, value: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in value.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.action, self.locator)?;
        for arg in &self.args {
            f.write_str(" ")?;
            write_literal(f, arg)?;
        }
        Ok(())
    }
}

/// Serializes back to the line DSL.
impl fmt::Display for TestSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, test) in self.tests.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "TEST {}", test.name)?;
            for stmt in &test.statements {
                writeln!(f, "  {stmt}")?;
            }
        }
        Ok(())
    }
}
