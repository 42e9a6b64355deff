//! Verb is-a tree and Wu-Palmer similarity.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::FilterError;

pub const BUNDLED_TAXONOMY: &str = include_str!("../../data/taxonomy.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct VerbTaxonomy {
    parent: BTreeMap<String, String>,
    depth: BTreeMap<String, usize>,
    root: String,
    read_group: BTreeSet<String>,
    write_group: BTreeSet<String>,
}

impl VerbTaxonomy {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_TAXONOMY).expect("bundled taxonomy is valid")
    }

    /// Parses `<verb> <parent>` and `group read|write <verbs...>` lines.
    pub fn parse(source: &str) -> Result<Self, FilterError> {
        let err = |line: usize, msg: String| FilterError::Taxonomy(format!("line {line}: {msg}"));
        let mut parent: BTreeMap<String, String> = BTreeMap::new();
        let mut read_group = BTreeSet::new();
        let mut write_group = BTreeSet::new();

        for (i, raw) in source.lines().enumerate() {
            let line = i + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = text.split_whitespace().collect();
            match fields.as_slice() {
                ["group", "read", verbs @ ..] if !verbs.is_empty() => {
                    read_group.extend(verbs.iter().map(|v| v.to_lowercase()))
                }
                ["group", "write", verbs @ ..] if !verbs.is_empty() => {
                    write_group.extend(verbs.iter().map(|v| v.to_lowercase()))
                }
                ["group", ..] => {
                    return Err(err(line, "expected `group read|write <verb>...`".into()))
                }
                [child, par] => {
                    let (child, par) = (child.to_lowercase(), par.to_lowercase());
                    if child == par {
                        return Err(err(line, format!("`{child}` cannot be its own parent")));
                    }
                    if parent.insert(child.clone(), par).is_some() {
                        return Err(err(line, format!("`{child}` has more than one parent")));
                    }
                }
                _ => return Err(err(line, format!("cannot parse `{text}`"))),
            }
        }

        let mut nodes: BTreeSet<String> = parent.keys().cloned().collect();
        nodes.extend(parent.values().cloned());
        let roots: Vec<&String> = nodes.iter().filter(|n| !parent.contains_key(*n)).collect();
        let root = match roots.as_slice() {
            [root] => (*root).clone(),
            [] => return Err(FilterError::Taxonomy("no root (cycle?)".into())),
            many => {
                return Err(FilterError::Taxonomy(format!(
                    "taxonomy must have a single root, found {}",
                    many.iter()
                        .map(|s| s.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                )))
            }
        };

        let mut depth = BTreeMap::new();
        for node in &nodes {
            let mut d = 1;
            let mut cur = node;
            while let Some(p) = parent.get(cur) {
                d += 1;
                if d > nodes.len() {
                    return Err(FilterError::Taxonomy(format!("cycle through `{node}`")));
                }
                cur = p;
            }
            depth.insert(node.clone(), d);
        }

        if read_group.is_empty() || write_group.is_empty() {
            return Err(FilterError::Taxonomy(
                "both read and write groups must be declared".into(),
            ));
        }
        if let Some(v) = read_group
            .iter()
            .chain(&write_group)
            .find(|v| !depth.contains_key(*v))
        {
            return Err(FilterError::Taxonomy(format!(
                "group verb `{v}` is not in the tree"
            )));
        }
        if let Some(v) = read_group.intersection(&write_group).next() {
            return Err(FilterError::Taxonomy(format!("`{v}` is in both groups")));
        }

        Ok(Self {
            parent,
            depth,
            root,
            read_group,
            write_group,
        })
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn contains(&self, verb: &str) -> bool {
        self.depth.contains_key(verb)
    }

    pub fn depth(&self, verb: &str) -> Option<usize> {
        self.depth.get(verb).copied()
    }

    pub fn read_group(&self) -> &BTreeSet<String> {
        &self.read_group
    }

    pub fn write_group(&self) -> &BTreeSet<String> {
        &self.write_group
    }

    pub fn verbs(&self) -> impl Iterator<Item = &str> {
        self.depth.keys().map(String::as_str)
    }

    fn ancestors(&self, verb: &str) -> Vec<&str> {
        let Some((own, _)) = self.depth.get_key_value(verb) else {
            return Vec::new();
        };
        let mut chain = vec![own.as_str()];
        let mut cur = own.as_str();
        while let Some(p) = self.parent.get(cur) {
            chain.push(p);
            cur = p;
        }
        chain
    }

    /// Deepest common ancestor (a node is its own ancestor).
    pub fn lowest_common_ancestor(&self, a: &str, b: &str) -> Option<&str> {
        if !self.contains(a) || !self.contains(b) {
            return None;
        }
        let of_b: BTreeSet<&str> = self.ancestors(b).into_iter().collect();
        self.ancestors(a).into_iter().find(|n| of_b.contains(n))
    }

    /// Wu-Palmer similarity `2·depth(lcs) / (depth(a) + depth(b))`.
    pub fn wup(&self, a: &str, b: &str) -> Option<f64> {
        let lcs = self.lowest_common_ancestor(a, b)?;
        let (da, db, dl) = (self.depth[a], self.depth[b], self.depth[lcs]);
        Some(2.0 * dl as f64 / (da + db) as f64)
    }
}
