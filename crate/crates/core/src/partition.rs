//! Set partitions of small component sets and their block-size shapes.
//!
//! Components are numbered `0..m` and a block is a bitmask over them, so
//! `m` is limited to 32.

use std::fmt;

use serde::{Serialize, Serializer};

/// A block of components encoded as a bitmask.
pub type Block = u32;

/// Sorted (descending) multiset of block sizes of a set partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(mut sizes: Vec<usize>) -> Self {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Shape(sizes)
    }

    pub fn of_blocks(blocks: &[Block]) -> Self {
        Shape::new(blocks.iter().map(|b| b.count_ones() as usize).collect())
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    /// Number of elements partitioned.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn num_blocks(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, size) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{size}")?;
        }
        Ok(())
    }
}

impl Serialize for Shape {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Integer partitions of `n` in reverse lexicographic order, e.g. for 4:
/// `[4] [3,1] [2,2] [2,1,1] [1,1,1,1]`.
pub fn integer_partitions(n: usize) -> Vec<Shape> {
    fn go(remaining: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Shape>) {
        if remaining == 0 {
            out.push(Shape(prefix.clone()));
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            prefix.push(part);
            go(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(n, n, &mut Vec::new(), &mut out);
    }
    out
}

/// All set partitions of `{0, .., m-1}`, each as a list of blocks sorted by
/// lowest member. Enumerated via restricted growth strings.
pub fn set_partitions(m: usize) -> Vec<Vec<Block>> {
    assert!(m <= 32, "at most 32 components");
    let mut out = Vec::new();
    if m == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut blocks: Vec<Block> = Vec::with_capacity(m);
    fn go(element: usize, m: usize, blocks: &mut Vec<Block>, out: &mut Vec<Vec<Block>>) {
        if element == m {
            out.push(blocks.clone());
            return;
        }
        let bit = 1 << element;
        for i in 0..blocks.len() {
            blocks[i] |= bit;
            go(element + 1, m, blocks, out);
            blocks[i] &= !bit;
        }
        blocks.push(bit);
        go(element + 1, m, blocks, out);
        blocks.pop();
    }
    go(0, m, &mut blocks, &mut out);
    out
}

/// Set partitions whose blocks all have at most `max_block` elements.
pub fn bounded_set_partitions(m: usize, max_block: usize) -> Vec<Vec<Block>> {
    set_partitions(m)
        .into_iter()
        .filter(|p| p.iter().all(|b| b.count_ones() as usize <= max_block))
        .collect()
}

/// Members of a block in increasing order.
pub fn members(block: Block) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| block & (1 << i) != 0)
}

/// All permutations of `0..m` in lexicographic order.
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..m).collect();
    let mut out = vec![current.clone()];
    // next_permutation
    while let Some(i) = (1..m).rev().find(|&i| current[i - 1] < current[i]) {
        let j = (i..m).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
    out
}

/// Image of a block under a permutation of its members.
pub fn permute_block(block: Block, perm: &[usize]) -> Block {
    members(block).fold(0, |acc, i| acc | (1 << perm[i]))
}
