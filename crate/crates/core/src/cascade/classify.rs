use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Cascade;
use crate::error::{Error, Result};

/// Structural class of a cascade. `S` is a post with no replies yet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CascadeType {
    S,
    A,
    B,
    C,
    D,
    E,
}

impl CascadeType {
    pub const ALL: [CascadeType; 6] = [
        CascadeType::S,
        CascadeType::A,
        CascadeType::B,
        CascadeType::C,
        CascadeType::D,
        CascadeType::E,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CascadeType::S => "S",
            CascadeType::A => "A",
            CascadeType::B => "B",
            CascadeType::C => "C",
            CascadeType::D => "D",
            CascadeType::E => "E",
        }
    }
}

impl fmt::Display for CascadeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CascadeType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CascadeType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown cascade type {s:?}")))
    }
}

/// A change of type under one added reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: CascadeType,
    pub to: CascadeType,
}

/// Every type change a single new reply can cause.
pub const ALLOWED_TRANSITIONS: [Transition; 7] = [
    Transition::new(CascadeType::S, CascadeType::A),
    Transition::new(CascadeType::A, CascadeType::B),
    Transition::new(CascadeType::A, CascadeType::C),
    Transition::new(CascadeType::A, CascadeType::E),
    Transition::new(CascadeType::B, CascadeType::C),
    Transition::new(CascadeType::C, CascadeType::D),
    Transition::new(CascadeType::E, CascadeType::D),
];

impl Transition {
    pub const fn new(from: CascadeType, to: CascadeType) -> Self {
        Transition { from, to }
    }

    pub fn is_allowed(self) -> bool {
        ALLOWED_TRANSITIONS.contains(&self)
    }

    pub fn is_bootstrap(self) -> bool {
        self.from == CascadeType::S
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

impl FromStr for Transition {
    type Err = Error;

    /// Accepts `A->C`, `A-C`, `A>C` and `AC`.
    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '>' | ' ' | '_'))
            .collect();
        let mut chars = cleaned.chars();
        match (chars.next(), chars.next(), chars.next()) {
            (Some(a), Some(b), None) => Ok(Transition::new(
                a.to_string().parse()?,
                b.to_string().parse()?,
            )),
            _ => Err(Error::InvalidParameter(format!("unknown transition {s:?}"))),
        }
    }
}

impl Serialize for Transition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Transition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The four quantities the decision table reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub volume: usize,
    /// Out-degree of the root.
    pub root_out: usize,
    /// Some non-root node has out-degree >= 2.
    pub inner_branching: bool,
    pub max_depth: usize,
}

impl Shape {
    pub fn classify(self) -> CascadeType {
        let Shape {
            volume,
            root_out,
            inner_branching,
            max_depth,
        } = self;
        if volume <= 1 {
            CascadeType::S
        } else if root_out <= 1 && !inner_branching {
            CascadeType::A
        } else if root_out >= 2 && max_depth == 1 {
            CascadeType::B
        } else if root_out >= 2 && !inner_branching {
            CascadeType::C
        } else if root_out >= 2 {
            CascadeType::D
        } else {
            CascadeType::E
        }
    }

    fn of_prefix(c: &Cascade, k: usize) -> Shape {
        let nodes = &c.nodes()[..k];
        let mut root_out = 0;
        let mut inner_branching = false;
        let mut max_depth = 0;
        for (i, node) in nodes.iter().enumerate() {
            max_depth = max_depth.max(node.depth);
            // children are stored in replay order, so those inside the prefix form a prefix
            let out = node.children.partition_point(|&child| child < k);
            if i == 0 {
                root_out = out;
            } else if out >= 2 {
                inner_branching = true;
            }
        }
        Shape {
            volume: k,
            root_out,
            inner_branching,
            max_depth,
        }
    }
}

pub fn classify(c: &Cascade) -> CascadeType {
    let inner_branching = c.nodes()[1..].iter().any(|n| n.children.len() >= 2);
    Shape {
        volume: c.volume(),
        root_out: c.root().children.len(),
        inner_branching,
        max_depth: c.max_depth(),
    }
    .classify()
}

/// Type of the tree formed by the first `k` nodes in replay order.
pub fn classify_prefix(c: &Cascade, k: usize) -> Result<CascadeType> {
    if k == 0 || k > c.volume() {
        return Err(Error::OutOfRange {
            what: "prefix length",
            detail: format!("{k} not in 1..={}", c.volume()),
        });
    }
    Ok(Shape::of_prefix(c, k).classify())
}

/// Tracks the decision-table inputs under leaf insertion in O(1) per node.
#[derive(Debug, Clone, Default)]
pub struct IncrementalClassifier {
    out_degree: Vec<u32>,
    depth: Vec<u32>,
    root_out: usize,
    inner_branching: bool,
    max_depth: usize,
}

impl IncrementalClassifier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        IncrementalClassifier {
            out_degree: Vec::with_capacity(n),
            depth: Vec::with_capacity(n),
            ..Default::default()
        }
    }

    /// Adds the next node; `parent` must index an already-added node, and
    /// only the first node may be parentless.
    pub fn push(&mut self, parent: Option<usize>) -> CascadeType {
        let depth = match parent {
            None => {
                assert!(self.depth.is_empty(), "only the first node may be a root");
                0
            }
            Some(p) => {
                self.out_degree[p] += 1;
                if p == 0 {
                    self.root_out += 1;
                } else if self.out_degree[p] >= 2 {
                    self.inner_branching = true;
                }
                self.depth[p] + 1
            }
        };
        self.out_degree.push(0);
        self.depth.push(depth);
        self.max_depth = self.max_depth.max(depth as usize);
        self.current()
    }

    pub fn shape(&self) -> Shape {
        Shape {
            volume: self.depth.len(),
            root_out: self.root_out,
            inner_branching: self.inner_branching,
            max_depth: self.max_depth,
        }
    }

    pub fn current(&self) -> CascadeType {
        self.shape().classify()
    }

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::super::testing::{from_parents, timed};
    use super::*;
    use CascadeType::*;

    #[test]
    fn small_shapes() {
        assert_eq!(classify(&from_parents(&[None])), S);
        assert_eq!(classify(&from_parents(&[None, Some(0)])), A);
        assert_eq!(classify(&from_parents(&[None, Some(0), Some(1)])), A);
        // star: root + 2 leaves
        let star = from_parents(&[None, Some(0), Some(0)]);
        assert_eq!((classify(&star), star.volume()), (B, 3));
        // root with two linear branches
        assert_eq!(classify(&from_parents(&[None, Some(0), Some(0), Some(1)])), C);
        // root -> x, x has a and b
        let e = from_parents(&[None, Some(0), Some(1), Some(1)]);
        assert_eq!((classify(&e), e.volume()), (E, 4));
        // root has x and y, x has a and b
        let d = from_parents(&[None, Some(0), Some(0), Some(1), Some(1)]);
        assert_eq!((classify(&d), d.volume()), (D, 5));
    }

    #[test]
    fn prefix_classification() {
        let chain = from_parents(&[None, Some(0), Some(1)]);
        assert_eq!(classify_prefix(&chain, 1).unwrap(), S);
        assert_eq!(classify_prefix(&chain, 2).unwrap(), A);
        assert!(classify_prefix(&chain, 0).is_err());
        assert!(classify_prefix(&chain, 4).is_err());

        // root, x and y reply to root, then a and b reply to x
        let d = timed(&[
            ("r", None, 0),
            ("x", Some(0), 10),
            ("y", Some(0), 20),
            ("a", Some(1), 30),
            ("b", Some(1), 40),
        ]);
        let types: Vec<_> = (1..=5).map(|k| classify_prefix(&d, k).unwrap()).collect();
        assert_eq!(types, vec![S, A, B, C, D]);
        assert_eq!(classify_prefix(&d, 5).unwrap(), classify(&d));
    }

    #[test]
    fn incremental_matches_prefix() {
        let c = from_parents(&[None, Some(0), Some(1), Some(1), Some(0), Some(2), Some(2)]);
        let mut inc = IncrementalClassifier::new();
        for (k, parent) in c.parents().enumerate() {
            assert_eq!(inc.push(parent), classify_prefix(&c, k + 1).unwrap());
        }
        assert_eq!(inc.current(), classify(&c));
    }

    #[test]
    fn transition_parsing() {
        let t: Transition = "A-C".parse().unwrap();
        assert_eq!(t, Transition::new(A, C));
        assert_eq!("e->d".parse::<Transition>().unwrap(), Transition::new(E, D));
        assert_eq!("BC".parse::<Transition>().unwrap().to_string(), "B->C");
        assert!("A".parse::<Transition>().is_err());
        assert!("A-X".parse::<Transition>().is_err());
        assert!(!Transition::new(A, D).is_allowed());
    }
}
