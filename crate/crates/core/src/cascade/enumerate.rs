use super::{Cascade, NodeSpec};
use crate::error::{Error, Result};

pub const MAX_ENUMERATION_SIZE: usize = 8;

/// Every rooted tree on `1..=max_n` nodes built by giving node `i` a parent
/// among nodes `0..i`: `(n-1)!` trees of size `n`. Node `i` is timestamped
/// `60 * i` so replay order equals construction order.
pub fn enumerate_rooted_trees(max_n: usize) -> Result<RootedTrees> {
    if !(1..=MAX_ENUMERATION_SIZE).contains(&max_n) {
        return Err(Error::OutOfRange {
            what: "max_n",
            detail: format!("{max_n} not in 1..={MAX_ENUMERATION_SIZE}"),
        });
    }
    Ok(RootedTrees {
        max_n,
        size: 1,
        choice: Vec::new(),
        exhausted: false,
    })
}

/// Iterator returned by [`enumerate_rooted_trees`].
#[derive(Debug, Clone)]
pub struct RootedTrees {
    max_n: usize,
    size: usize,
    /// `choice[j]` is the parent of node `j + 1`; an odometer with digit `j`
    /// ranging over `0..=j`.
    choice: Vec<usize>,
    exhausted: bool,
}

impl RootedTrees {
    fn current(&self) -> Cascade {
        let specs = std::iter::once(None)
            .chain(self.choice.iter().map(|&p| Some(p)))
            .enumerate()
            .map(|(i, parent)| NodeSpec {
                post_id: format!("t{i}"),
                user_id: format!("u{i}"),
                timestamp: 60 * i as i64,
                parent,
                hashtags: Vec::new(),
            })
            .collect();
        Cascade::from_canonical(specs, false)
    }

    fn advance(&mut self) {
        for j in (0..self.choice.len()).rev() {
            if self.choice[j] < j {
                self.choice[j] += 1;
                return;
            }
            self.choice[j] = 0;
        }
        self.size += 1;
        if self.size > self.max_n {
            self.exhausted = true;
        } else {
            self.choice = vec![0; self.size - 1];
        }
    }
}

impl Iterator for RootedTrees {
    type Item = Cascade;

    fn next(&mut self) -> Option<Cascade> {
        if self.exhausted {
            return None;
        }
        let tree = self.current();
        self.advance();
        Some(tree)
    }
}
