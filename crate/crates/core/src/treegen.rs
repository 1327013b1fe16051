//! The decision tree shared by prover and verifier.
//!
//! A full binary tree of depth `n + 1` is stored as its `2^(n+2) - 2` node
//! bits in breadth-first, left-to-right order, root excluded. Level `i`
//! (1-based) starts at index `2^i - 2`; the node reached by challenge prefix
//! `q_1..q_i` sits at offset `value(q_1..q_i)` within its level. Levels
//! `1..=n` hold fast-phase replies and level `n + 1` holds the leaves whose
//! leftmost `m` bits form the authentication string.

use rand::RngCore;

use crate::bits::BitString;
use crate::error::Error;
use crate::expand::{Domain, Expander, TreeMode};
use crate::types::{Key, Nonce, NonceRole, ProtocolParams};

/// Deepest tree this crate will materialize (`2^26` node bits, 8 MiB).
pub const MAX_TREE_ROUNDS: usize = 24;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DecisionTree {
    n: usize,
    nodes: BitString,
}

impl std::fmt::Debug for DecisionTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DecisionTree")
            .field("n", &self.n)
            .field("nodes", &self.nodes)
            .finish()
    }
}

/// Number of node bits for `n` fast-phase levels.
pub fn node_count(n: usize) -> usize {
    (1usize << (n + 2)) - 2
}

#[inline]
fn level_start(level: usize) -> usize {
    (1usize << level) - 2
}

fn check_depth(n: usize) -> Result<(), Error> {
    if n == 0 || n > MAX_TREE_ROUNDS {
        return Err(Error::TreeTooLarge(n));
    }
    Ok(())
}

/// Builds `tau(a, b, k)`.
///
/// In [`TreeMode::Prf`] the tree is a pure function of `(k, a, b)` and `rng`
/// is not touched. In [`TreeMode::IdealUniform`] every node is a fresh fair
/// coin from `rng`.
pub fn build_tree<R: RngCore + ?Sized>(
    params: &ProtocolParams,
    key: &Key,
    a: &Nonce,
    b: &Nonce,
    mode: TreeMode,
    rng: &mut R,
) -> Result<DecisionTree, Error> {
    a.check(params, NonceRole::VerifierNonceA)?;
    b.check(params, NonceRole::ProverNonceB)?;
    check_depth(params.n())?;
    let len = node_count(params.n());
    let nodes = match mode {
        TreeMode::Prf => crate::expand::prf_expand(Domain::Tree, key, &[a.bits(), b.bits()], len),
        TreeMode::IdealUniform => BitString::random(len, rng),
    };
    DecisionTree::from_nodes(params.n(), nodes)
}

/// Builds the tree through a shared [`Expander`], so prover and verifier
/// sessions drawing from the same expander agree on it.
pub fn build_tree_with(
    params: &ProtocolParams,
    key: &Key,
    a: &Nonce,
    b: &Nonce,
    expander: &mut Expander,
) -> Result<DecisionTree, Error> {
    a.check(params, NonceRole::VerifierNonceA)?;
    b.check(params, NonceRole::ProverNonceB)?;
    check_depth(params.n())?;
    let nodes = expander.expand(
        Domain::Tree,
        key,
        &[a.bits(), b.bits()],
        node_count(params.n()),
    )?;
    DecisionTree::from_nodes(params.n(), nodes)
}

impl DecisionTree {
    pub fn from_nodes(n: usize, nodes: BitString) -> Result<Self, Error> {
        check_depth(n)?;
        if nodes.len() != node_count(n) {
            return Err(Error::LengthMismatch {
                what: "tree nodes",
                expected: node_count(n),
                actual: nodes.len(),
            });
        }
        Ok(DecisionTree { n, nodes })
    }

    /// Fast-phase rounds; the tree has depth `n + 1`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.n + 1
    }

    pub fn nodes(&self) -> &BitString {
        &self.nodes
    }

    /// Node value at `level` (1-based, up to `n + 1`) and horizontal position.
    pub fn node(&self, level: usize, position: usize) -> bool {
        debug_assert!(level >= 1 && level <= self.n + 1 && position < (1 << level));
        self.nodes.get(level_start(level) + position)
    }

    /// All bits of one level, left to right.
    pub fn level(&self, level: usize) -> BitString {
        assert!(level >= 1 && level <= self.n + 1, "level out of range");
        self.nodes.slice(level_start(level), 1 << level)
    }

    /// `r_i(q^i)`: the node reached from the root along edges `challenges`
    /// (0 = left, 1 = right). `challenges.len()` is the round `i`.
    pub fn reply(&self, challenges: &[bool]) -> Result<bool, Error> {
        let i = challenges.len();
        if i == 0 || i > self.n {
            return Err(Error::RoundOutOfRange {
                round: i,
                max: self.n,
            });
        }
        let pos = challenges
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | q as usize);
        Ok(self.node(i, pos))
    }

    /// Replies `r_1, ..., r_j` along a challenge path of length `j <= n`.
    pub fn reply_path(&self, challenges: &[bool]) -> Result<Vec<bool>, Error> {
        if challenges.len() > self.n {
            return Err(Error::RoundOutOfRange {
                round: challenges.len(),
                max: self.n,
            });
        }
        let mut pos = 0usize;
        Ok(challenges
            .iter()
            .enumerate()
            .map(|(i, &q)| {
                pos = (pos << 1) | q as usize;
                self.node(i + 1, pos)
            })
            .collect())
    }

    /// The `m` leftmost leaves, left to right.
    pub fn auth_string(&self, m: usize) -> Result<BitString, Error> {
        let leaves = 1usize << (self.n + 1);
        if m == 0 || m > leaves {
            return Err(Error::LengthMismatch {
                what: "authentication bits",
                expected: leaves,
                actual: m,
            });
        }
        Ok(self.nodes.slice(level_start(self.n + 1), m))
    }

    /// Bit-packed node values, zero-padded to a byte boundary.
    pub fn serialize(&self) -> Vec<u8> {
        self.nodes.as_bytes().to_vec()
    }

    pub fn deserialize(bytes: &[u8], n: usize) -> Result<Self, Error> {
        check_depth(n)?;
        let nodes = BitString::from_bytes(bytes, node_count(n))?;
        DecisionTree::from_nodes(n, nodes)
    }
}

/// Bytes needed to store a tree with `n` fast-phase levels.
pub fn serialized_len(n: usize) -> usize {
    node_count(n).div_ceil(8)
}
