//! The ten logical error types, their structural groups, the coincidence
//! graph between them, and the priority ordering used to pick a dominant
//! error when several apply to the same code.
//!
//! Everything except the set of ids is loaded from a TOML data file so the
//! group table and edge list can be corrected without touching code. A
//! loaded [`Taxonomy`] is immutable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_TAXONOMY: &str = include_str!("../data/taxonomy.toml");

/// Category names in id order. A loaded taxonomy must use exactly these.
pub const CATEGORY_NAMES: [&str; 10] = [
    "Input",
    "Output",
    "Variable",
    "Computation",
    "Condition",
    "Branching",
    "Loop",
    "Array/String",
    "Function",
    "Conceptual",
];

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("invalid argument: unknown error type id {0:?} (expected one of A-J)")]
    UnknownId(String),
    #[error("failed to read taxonomy file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse taxonomy data: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid taxonomy data: {0}")]
    Schema(String),
}

/// Identifier of one of the ten error types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ErrorId {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
}

impl ErrorId {
    pub const ALL: [ErrorId; 10] = [
        ErrorId::A,
        ErrorId::B,
        ErrorId::C,
        ErrorId::D,
        ErrorId::E,
        ErrorId::F,
        ErrorId::G,
        ErrorId::H,
        ErrorId::I,
        ErrorId::J,
    ];

    /// Position in `A..=J`, usable as an index into label vectors.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<ErrorId> {
        Self::ALL.get(index).copied()
    }

    pub fn letter(self) -> char {
        (b'A' + self as u8) as char
    }
}

impl fmt::Display for ErrorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for ErrorId {
    type Err = TaxonomyError;

    /// Accepts `A`, `a`, `(A)` and surrounding whitespace.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let inner = trimmed
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .unwrap_or(trimmed)
            .trim();
        let mut chars = inner.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_alphabetic() => {
                let upper = c.to_ascii_uppercase();
                ErrorId::from_index((upper as u8).wrapping_sub(b'A') as usize)
                    .ok_or_else(|| TaxonomyError::UnknownId(s.to_string()))
            }
            _ => Err(TaxonomyError::UnknownId(s.to_string())),
        }
    }
}

/// Where an error type sits in the Input / Process / Output structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StructuralGroup {
    Input,
    ProcessDeclInit,
    ProcessRemaining,
    Output,
    /// Overlaps every other group.
    Global,
}

impl StructuralGroup {
    /// Ordinal along the program flow; `None` for [`StructuralGroup::Global`].
    pub fn sequence_position(self) -> Option<u8> {
        match self {
            StructuralGroup::Input => Some(1),
            StructuralGroup::ProcessDeclInit => Some(2),
            StructuralGroup::ProcessRemaining => Some(3),
            StructuralGroup::Output => Some(4),
            StructuralGroup::Global => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorType {
    pub id: ErrorId,
    pub name: String,
    pub description: String,
    pub occurrence_examples: Vec<String>,
    pub group: StructuralGroup,
    pub rank: u8,
}

/// Unordered pair of distinct types whose definitions overlap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoincidenceEdge {
    endpoints: (ErrorId, ErrorId),
    pub note: String,
}

impl CoincidenceEdge {
    pub fn new(a: ErrorId, b: ErrorId, note: impl Into<String>) -> Result<Self, TaxonomyError> {
        if a == b {
            return Err(TaxonomyError::Schema(format!(
                "edge endpoints must differ, got {a}-{a}"
            )));
        }
        Ok(Self {
            endpoints: (a.min(b), a.max(b)),
            note: note.into(),
        })
    }

    /// Endpoints with the smaller id first.
    pub fn endpoints(&self) -> (ErrorId, ErrorId) {
        self.endpoints
    }

    pub fn touches(&self, id: ErrorId) -> bool {
        self.endpoints.0 == id || self.endpoints.1 == id
    }

    pub fn other(&self, id: ErrorId) -> Option<ErrorId> {
        match self.endpoints {
            (a, b) if a == id => Some(b),
            (a, b) if b == id => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderingTable {
    rank_of: [u8; 10],
}

impl OrderingTable {
    pub fn rank(&self, id: ErrorId) -> u8 {
        self.rank_of[id.index()]
    }
}

/// Result of resolving a detected set to its highest-priority members.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Dominant {
    pub maximal_set: BTreeSet<ErrorId>,
    pub canonical: Option<ErrorId>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTaxonomy {
    version: u32,
    types: Vec<RawType>,
    ranks: BTreeMap<String, u8>,
    groups: BTreeMap<String, StructuralGroup>,
    #[serde(default)]
    edges: Vec<RawEdge>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawType {
    id: String,
    name: String,
    description: String,
    occurrence_examples: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    between: [String; 2],
    note: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    types: Vec<ErrorType>,
    ordering: OrderingTable,
    edges: Vec<CoincidenceEdge>,
}

impl Taxonomy {
    /// The taxonomy shipped in `data/taxonomy.toml`.
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN_TAXONOMY).expect("bundled taxonomy data is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TaxonomyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| TaxonomyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, TaxonomyError> {
        let raw: RawTaxonomy = toml::from_str(text)?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawTaxonomy) -> Result<Self, TaxonomyError> {
        if raw.version != 1 {
            return Err(TaxonomyError::Schema(format!(
                "unsupported version {}",
                raw.version
            )));
        }
        let ranks = keyed_table(raw.ranks, "ranks")?;
        let groups = keyed_table(raw.groups, "groups")?;

        let mut slots: [Option<ErrorType>; 10] = Default::default();
        for t in raw.types {
            let id: ErrorId = t.id.parse()?;
            if slots[id.index()].is_some() {
                return Err(TaxonomyError::Schema(format!(
                    "duplicate type record for {id}"
                )));
            }
            if t.name != CATEGORY_NAMES[id.index()] {
                return Err(TaxonomyError::Schema(format!(
                    "type {id} must be named {:?}, found {:?}",
                    CATEGORY_NAMES[id.index()],
                    t.name
                )));
            }
            if t.description.trim().is_empty() {
                return Err(TaxonomyError::Schema(format!(
                    "type {id} has an empty description"
                )));
            }
            if t.occurrence_examples.is_empty() {
                return Err(TaxonomyError::Schema(format!(
                    "type {id} has no occurrence examples"
                )));
            }
            slots[id.index()] = Some(ErrorType {
                id,
                name: t.name,
                description: t.description,
                occurrence_examples: t.occurrence_examples,
                group: groups[id.index()],
                rank: ranks[id.index()],
            });
        }
        let mut types = Vec::with_capacity(10);
        for (i, slot) in slots.into_iter().enumerate() {
            match slot {
                Some(t) => types.push(t),
                None => {
                    return Err(TaxonomyError::Schema(format!(
                        "missing type record for {}",
                        ErrorId::ALL[i]
                    )))
                }
            }
        }

        for t in &types {
            if t.rank == 0 {
                return Err(TaxonomyError::Schema(format!(
                    "rank of {} must be positive",
                    t.id
                )));
            }
            let is_global = t.group == StructuralGroup::Global;
            if is_global != (t.id == ErrorId::J) {
                return Err(TaxonomyError::Schema(format!(
                    "only J may be in the Global group ({} is {:?})",
                    t.id, t.group
                )));
            }
        }

        let mut edges: Vec<CoincidenceEdge> = Vec::with_capacity(raw.edges.len());
        for e in raw.edges {
            let a: ErrorId = e.between[0].parse()?;
            let b: ErrorId = e.between[1].parse()?;
            let edge = CoincidenceEdge::new(a, b, e.note)?;
            if edges.iter().any(|x| x.endpoints == edge.endpoints) {
                return Err(TaxonomyError::Schema(format!("duplicate edge {a}-{b}")));
            }
            edges.push(edge);
        }
        edges.sort_by_key(|e| e.endpoints);

        let taxonomy = Taxonomy {
            types,
            ordering: OrderingTable { rank_of: ranks },
            edges,
        };
        for other in ErrorId::ALL.into_iter().filter(|&x| x != ErrorId::J) {
            if taxonomy.edge(ErrorId::J, other).is_none() {
                return Err(TaxonomyError::Schema(format!(
                    "J must be adjacent to {other}"
                )));
            }
        }
        Ok(taxonomy)
    }

    pub fn types(&self) -> &[ErrorType] {
        &self.types
    }

    pub fn get(&self, id: ErrorId) -> &ErrorType {
        &self.types[id.index()]
    }

    pub fn ordering(&self) -> &OrderingTable {
        &self.ordering
    }

    pub fn edges(&self) -> &[CoincidenceEdge] {
        &self.edges
    }

    pub fn rank(&self, id: ErrorId) -> u8 {
        self.ordering.rank(id)
    }

    pub fn group_of(&self, id: ErrorId) -> StructuralGroup {
        self.get(id).group
    }

    /// Keeps every detected type of maximal rank; the canonical pick is the
    /// alphabetically first of those.
    pub fn dominant<I>(&self, detected: I) -> Dominant
    where
        I: IntoIterator<Item = ErrorId>,
    {
        let detected: BTreeSet<ErrorId> = detected.into_iter().collect();
        let Some(top) = detected.iter().map(|&id| self.rank(id)).max() else {
            return Dominant::default();
        };
        let maximal_set: BTreeSet<ErrorId> = detected
            .into_iter()
            .filter(|&id| self.rank(id) == top)
            .collect();
        let canonical = maximal_set.iter().next().copied();
        Dominant {
            maximal_set,
            canonical,
        }
    }

    pub fn coincidence_neighbors(&self, id: ErrorId) -> BTreeSet<ErrorId> {
        self.edges.iter().filter_map(|e| e.other(id)).collect()
    }

    pub fn edge(&self, a: ErrorId, b: ErrorId) -> Option<&CoincidenceEdge> {
        let key = (a.min(b), a.max(b));
        self.edges.iter().find(|e| e.endpoints == key)
    }

    /// Coincidence neighbours that outrank `id`, highest rank first.
    pub fn higher_ranked_neighbors(&self, id: ErrorId) -> Vec<(ErrorId, &CoincidenceEdge)> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .filter_map(|e| e.other(id).map(|n| (n, e)))
            .filter(|(n, _)| self.rank(*n) > self.rank(id))
            .collect();
        out.sort_by(|(x, _), (y, _)| self.rank(*y).cmp(&self.rank(*x)).then(x.cmp(y)));
        out
    }

    /// Renders the ordering as `(J) > (A) > ... > (B)`, writing `=` between
    /// tied types.
    pub fn ordering_string(&self) -> String {
        let mut ids = ErrorId::ALL.to_vec();
        ids.sort_by(|x, y| self.rank(*y).cmp(&self.rank(*x)).then(x.cmp(y)));
        let mut out = String::new();
        for (i, id) in ids.iter().enumerate() {
            if i > 0 {
                let sep = if self.rank(ids[i - 1]) == self.rank(*id) {
                    " = "
                } else {
                    " > "
                };
                out.push_str(sep);
            }
            out.push('(');
            out.push(id.letter());
            out.push(')');
        }
        out
    }
}

fn keyed_table<T: Copy>(map: BTreeMap<String, T>, table: &str) -> Result<[T; 10], TaxonomyError> {
    let mut slots: [Option<T>; 10] = [None; 10];
    for (key, value) in map {
        let id: ErrorId = key.parse()?;
        if slots[id.index()].replace(value).is_some() {
            return Err(TaxonomyError::Schema(format!(
                "duplicate {id} in [{table}]"
            )));
        }
    }
    let mut out = Vec::with_capacity(10);
    for (i, slot) in slots.iter().enumerate() {
        out.push(slot.ok_or_else(|| {
            TaxonomyError::Schema(format!("[{table}] is missing {}", ErrorId::ALL[i]))
        })?);
    }
    Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
}
