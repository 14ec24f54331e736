//! Bit-exact sketch format.
//!
//! Layout (little-endian): magic `RLTS`, a version byte, then `n`, `d`, `p`
//! (0 for the max norm) as `u64`, ε as two `u32` (numerator, exponent), the
//! scale exponent as a two's-complement `u64`, the Φ exponent as `u64` and a
//! flag byte. Nine sections follow, each prefixed by its length in bits as a
//! `u64` and padded to a whole byte:
//!
//! | section        | content                                                   |
//! |----------------|-----------------------------------------------------------|
//! | topology       | balanced parentheses of a preorder walk                   |
//! | long_edges     | per non-root node a flag, plus γ-code of `k` when long    |
//! | centers        | `ceil(log2 n)` bits per node                              |
//! | ingresses      | 2-bit tag (self/parent/subtree leaf) + L(T) index         |
//! | gammas         | Elias-gamma of `1/γ(v)` per non-subtree-root              |
//! | etas           | fixed-width offset-binary η coordinates                  |
//! | leaf_etas      | fixed-width offset-binary η_ε coordinates                |
//! | landmarks      | count, then node id + `K+2`-bit surrogate coordinates     |
//! | augmentations  | Euclidean only: A (and B) corners, two copies each        |

pub mod bits;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use self::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::metric::{index_width, Epsilon, Norm};
use crate::tree::{landmark_depth, EdgeKind, RelativeLocationTree};

pub const MAGIC: &[u8; 4] = b"RLTS";
pub const VERSION: u8 = 1;

const FLAG_EUCLIDEAN: u8 = 1;
pub const FIXED_HEADER_BYTES: usize = 4 + 1 + 8 * 3 + 4 * 2 + 8 * 2 + 1;
pub const SECTION_COUNT: usize = 9;

pub const SECTION_NAMES: [&str; SECTION_COUNT] = [
    "topology",
    "long_edges",
    "centers",
    "ingresses",
    "gammas",
    "etas",
    "leaf_etas",
    "landmarks",
    "augmentations",
];

const TAG_SELF: u64 = 0;
const TAG_PARENT: u64 = 1;
const TAG_LEAF: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SketchHeader {
    pub n: u64,
    pub d: u64,
    pub norm: Norm,
    pub eps: Epsilon,
    /// Distances are reported multiplied by `2^scale_exponent`.
    pub scale_exponent: i64,
    /// Level of the root of T.
    pub phi_exponent: u32,
    pub euclidean: bool,
}

impl SketchHeader {
    pub fn root_dim(&self) -> f64 {
        self.norm.root_dim(self.d as usize)
    }

    /// Landmark depth `K`.
    pub fn landmark_k(&self) -> u32 {
        landmark_depth(self.phi_exponent, self.d as usize, self.norm)
    }
}

/// Serialized annotations of one node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRecord {
    pub level: u32,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub edge: EdgeKind,
    pub center: usize,
    pub ingress: usize,
    pub gamma_code: Option<u64>,
    pub eta: Option<Vec<i64>>,
    pub eta_eps: Option<Vec<i64>>,
}

/// Randomized corners for one subtree leaf, in grid units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugEntry {
    /// A_v for the two independent shifts.
    pub a: [Vec<i64>; 2],
    /// B_v for the two shifts; present iff the node's subtree root is not the root of T.
    pub b: Option<[Vec<i64>; 2]>,
}

/// Augmentations indexed like [`Layout::subtree_leaves`].
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AugmentationTable {
    pub entries: Vec<AugEntry>,
}

/// Per-coordinate bound on augmentation corners, in cells: `ceil(2√d) + 1`.
pub fn augmentation_bound(d: u64) -> u64 {
    (2.0 * (d as f64).sqrt()).ceil() as u64 + 1
}

/// Structure derived from the topology and the long-edge flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub subtree_root: Vec<usize>,
    /// L(T) in preorder.
    pub subtree_leaves: Vec<usize>,
    /// Position of a node in `subtree_leaves`.
    pub leaf_index: Vec<Option<usize>>,
}

impl Layout {
    pub fn new(nodes: &[NodeRecord]) -> Self {
        let m = nodes.len();
        let mut subtree_root = vec![0; m];
        for v in 0..m {
            subtree_root[v] = match (nodes[v].parent, nodes[v].edge) {
                (Some(p), EdgeKind::Short) => subtree_root[p],
                _ => v,
            };
        }
        let subtree_leaves: Vec<usize> = (0..m)
            .filter(|&v| nodes[v].children.iter().all(|&c| nodes[c].edge != EdgeKind::Short))
            .collect();
        let mut leaf_index = vec![None; m];
        for (i, &v) in subtree_leaves.iter().enumerate() {
            leaf_index[v] = Some(i);
        }
        Layout {
            subtree_root,
            subtree_leaves,
            leaf_index,
        }
    }

    pub fn is_subtree_root(&self, v: usize) -> bool {
        self.subtree_root[v] == v
    }
}

/// Everything a sketch stores, in decoded form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchContents {
    pub header: SketchHeader,
    /// Nodes of T in preorder.
    pub nodes: Vec<NodeRecord>,
    /// Stored landmarks `(node, S(v))`, surrogates in units of `d^{-1/p}`.
    pub landmarks: Vec<(usize, Vec<i64>)>,
    pub augmentations: Option<AugmentationTable>,
}

impl SketchContents {
    pub fn from_tree(tree: &RelativeLocationTree, aug: Option<AugmentationTable>) -> Result<Self> {
        let ps = tree.points();
        let header = SketchHeader {
            n: ps.len() as u64,
            d: ps.dim() as u64,
            norm: ps.norm(),
            eps: tree.eps,
            scale_exponent: ps.scale_exponent() as i64,
            phi_exponent: tree.top_level,
            euclidean: aug.is_some(),
        };
        let nodes = tree
            .nodes
            .iter()
            .map(|v| NodeRecord {
                level: v.level,
                parent: v.parent,
                children: v.children.clone(),
                edge: v.parent_edge,
                center: v.center,
                ingress: v.ingress,
                gamma_code: v.gamma_code,
                eta: v.eta.clone(),
                eta_eps: v.eta_eps.clone(),
            })
            .collect();
        let landmarks = tree
            .landmarks
            .iter()
            .filter(|&&v| !tree.is_subtree_root(v))
            .map(|&v| (v, tree.surrogate_units[v].clone()))
            .collect();
        Ok(SketchContents {
            header,
            nodes,
            landmarks,
            augmentations: aug,
        })
    }

    pub fn layout(&self) -> Layout {
        Layout::new(&self.nodes)
    }
}

/// An encoded sketch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchBits {
    bytes: Vec<u8>,
}

impl SketchBits {
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self> {
        let bits = SketchBits { bytes };
        bits.sections()?;
        Ok(bits)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// Total length in bits, framing included.
    pub fn len_bits(&self) -> u64 {
        self.bytes.len() as u64 * 8
    }

    pub fn header(&self) -> Result<SketchHeader> {
        read_header(&self.bytes)
    }

    pub fn size_report(&self) -> Result<SizeReport> {
        size_report(self)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, &self.bytes)?;
        Ok(())
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(fs::read(path)?)
    }

    /// `(bit length, byte range)` of each section.
    fn sections(&self) -> Result<Vec<(u64, std::ops::Range<usize>)>> {
        read_header(&self.bytes)?;
        let mut pos = FIXED_HEADER_BYTES;
        let mut out = Vec::with_capacity(SECTION_COUNT);
        for _ in 0..SECTION_COUNT {
            let len = read_u64(&self.bytes, pos)?;
            pos += 8;
            let nbytes = usize::try_from(len.div_ceil(8)).map_err(|_| Error::Truncated)?;
            let end = pos.checked_add(nbytes).ok_or(Error::Truncated)?;
            if end > self.bytes.len() {
                return Err(Error::Truncated);
            }
            out.push((len, pos..end));
            pos = end;
        }
        if pos != self.bytes.len() {
            return Err(Error::Malformed(format!(
                "{} trailing bytes after the last section",
                self.bytes.len() - pos
            )));
        }
        Ok(out)
    }
}

/// Bit counts per section. `header` covers the fixed header, the section
/// length prefixes and byte padding, so the fields sum to the file length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeReport {
    pub header: u64,
    pub topology: u64,
    pub long_edges: u64,
    pub centers: u64,
    pub ingresses: u64,
    pub gammas: u64,
    pub etas: u64,
    pub leaf_etas: u64,
    pub landmarks: u64,
    pub augmentations: u64,
}

impl SizeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("size report serializes")
    }

    pub fn total(&self) -> u64 {
        self.header + self.sections().iter().sum::<u64>()
    }

    /// Section counts in file order, header excluded.
    pub fn sections(&self) -> [u64; SECTION_COUNT] {
        [
            self.topology,
            self.long_edges,
            self.centers,
            self.ingresses,
            self.gammas,
            self.etas,
            self.leaf_etas,
            self.landmarks,
            self.augmentations,
        ]
    }
}

pub fn size_report(bits: &SketchBits) -> Result<SizeReport> {
    let secs = bits.sections()?;
    let lens: Vec<u64> = secs.iter().map(|s| s.0).collect();
    let body: u64 = lens.iter().sum();
    Ok(SizeReport {
        header: bits.len_bits() - body,
        topology: lens[0],
        long_edges: lens[1],
        centers: lens[2],
        ingresses: lens[3],
        gammas: lens[4],
        etas: lens[5],
        leaf_etas: lens[6],
        landmarks: lens[7],
        augmentations: lens[8],
    })
}

fn read_u64(bytes: &[u8], pos: usize) -> Result<u64> {
    let slice = bytes.get(pos..pos + 8).ok_or(Error::Truncated)?;
    Ok(u64::from_le_bytes(slice.try_into().unwrap()))
}

fn read_u32(bytes: &[u8], pos: usize) -> Result<u32> {
    let slice = bytes.get(pos..pos + 4).ok_or(Error::Truncated)?;
    Ok(u32::from_le_bytes(slice.try_into().unwrap()))
}

fn read_header(bytes: &[u8]) -> Result<SketchHeader> {
    if bytes.len() < 4 {
        return Err(Error::Truncated);
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < FIXED_HEADER_BYTES {
        return Err(Error::Truncated);
    }
    if bytes[4] != VERSION {
        return Err(Error::UnsupportedVersion(bytes[4]));
    }
    let n = read_u64(bytes, 5)?;
    let d = read_u64(bytes, 13)?;
    let norm = Norm::from_code(read_u64(bytes, 21)?)?;
    let eps = Epsilon::new(read_u32(bytes, 29)?, read_u32(bytes, 33)?)
        .map_err(|e| Error::Malformed(e.to_string()))?;
    let scale_exponent = read_u64(bytes, 37)? as i64;
    let phi_exponent = u32::try_from(read_u64(bytes, 45)?)
        .map_err(|_| Error::Malformed("phi exponent too large".into()))?;
    let flags = bytes[53];
    if flags & !FLAG_EUCLIDEAN != 0 {
        return Err(Error::Malformed(format!("unknown flags {flags:#x}")));
    }
    if n == 0 || d == 0 {
        return Err(Error::Malformed("empty point set in header".into()));
    }
    Ok(SketchHeader {
        n,
        d,
        norm,
        eps,
        scale_exponent,
        phi_exponent,
        euclidean: flags & FLAG_EUCLIDEAN != 0,
    })
}

/// Widths that depend only on the header and a node's precision code.
struct Widths {
    root_dim: f64,
    inv_eps: f64,
}

impl Widths {
    fn new(h: &SketchHeader) -> Self {
        Widths {
            root_dim: h.root_dim(),
            inv_eps: (1u64 << h.eps.exponent()) as f64 / h.eps.numerator() as f64,
        }
    }

    /// Bound `ceil(2·d^{1/p}·G)` on η coordinates and the matching width.
    fn eta(&self, code: u64) -> Result<(u64, u32)> {
        bound_width(2.0 * self.root_dim * code as f64)
    }

    fn eta_eps(&self, code: u64) -> Result<(u64, u32)> {
        bound_width(2.0 * self.root_dim * code as f64 * self.inv_eps)
    }
}

fn bound_width(x: f64) -> Result<(u64, u32)> {
    let b = x.ceil();
    if !(b.is_finite() && b < (1u64 << 61) as f64) {
        return Err(Error::Overflow("coordinate width"));
    }
    let b = b as u64;
    Ok((b, index_width(2 * b + 1)))
}

fn landmark_width(h: &SketchHeader) -> Result<(u64, u32)> {
    let k = h.landmark_k();
    if k + 2 > 63 {
        return Err(Error::Overflow("landmark width"));
    }
    Ok((1u64 << (k + 1), k + 2))
}

fn write_coords(
    w: &mut BitWriter,
    section: &'static str,
    node: usize,
    coords: &[i64],
    bound: u64,
    width: u32,
    upper_exclusive: bool,
) -> Result<()> {
    for &c in coords {
        let b = bound as i64;
        let out = c < -b || c > b || (upper_exclusive && c == b);
        if out {
            return Err(Error::CoordinateOutOfRange {
                section,
                node,
                value: c,
                bound: b,
            });
        }
        w.write_signed(c, bound, width);
    }
    Ok(())
}

fn read_coords(r: &mut BitReader, d: usize, bound: u64, width: u32) -> Result<Vec<i64>> {
    (0..d).map(|_| r.read_signed(bound, width)).collect()
}

/// Serializes sketch contents.
pub fn encode(c: &SketchContents) -> Result<SketchBits> {
    let h = &c.header;
    let m = c.nodes.len();
    let d = h.d as usize;
    if m == 0 {
        return Err(Error::Malformed("tree has no nodes".into()));
    }
    let layout = c.layout();
    let widths = Widths::new(h);
    let mut sections: Vec<BitWriter> = (0..SECTION_COUNT).map(|_| BitWriter::new()).collect();

    // topology
    {
        let w = &mut sections[0];
        let mut stack = vec![(0usize, false)];
        while let Some((v, closing)) = stack.pop() {
            if closing {
                w.write_bit(false);
                continue;
            }
            w.write_bit(true);
            stack.push((v, true));
            for &ch in c.nodes[v].children.iter().rev() {
                stack.push((ch, false));
            }
        }
    }
    // long edges
    for v in 1..m {
        match c.nodes[v].edge {
            EdgeKind::Short => sections[1].write_bit(false),
            EdgeKind::Long(k) => {
                sections[1].write_bit(true);
                sections[1].write_gamma(k as u64);
            }
        }
    }
    // centers
    let cw = index_width(h.n);
    for v in &c.nodes {
        sections[2].write_bits(v.center as u64, cw);
    }
    // ingresses
    let lw = index_width(layout.subtree_leaves.len() as u64);
    for (v, node) in c.nodes.iter().enumerate() {
        let w = &mut sections[3];
        if node.ingress == v {
            w.write_bits(TAG_SELF, 2);
        } else if Some(node.ingress) == node.parent {
            w.write_bits(TAG_PARENT, 2);
        } else {
            let idx = layout.leaf_index[node.ingress].ok_or_else(|| {
                Error::Malformed(format!("ingress of node {v} is not a subtree leaf"))
            })?;
            w.write_bits(TAG_LEAF, 2);
            w.write_bits(idx as u64, lw);
        }
    }
    // gammas, etas, leaf etas
    for (v, node) in c.nodes.iter().enumerate() {
        if layout.is_subtree_root(v) {
            continue;
        }
        let code = node
            .gamma_code
            .ok_or(Error::MissingAnnotation { node: v, field: "gamma" })?;
        sections[4].write_gamma(code);
        let eta = node
            .eta
            .as_ref()
            .ok_or(Error::MissingAnnotation { node: v, field: "eta" })?;
        let (bound, width) = widths.eta(code)?;
        write_coords(&mut sections[5], "etas", v, eta, bound, width, false)?;
        if layout.leaf_index[v].is_some() {
            let fine = node
                .eta_eps
                .as_ref()
                .ok_or(Error::MissingAnnotation { node: v, field: "eta_eps" })?;
            let (bound, width) = widths.eta_eps(code)?;
            write_coords(&mut sections[6], "leaf_etas", v, fine, bound, width, false)?;
        }
    }
    // landmarks
    {
        let (bound, width) = landmark_width(h)?;
        let idw = index_width(m as u64);
        let w = &mut sections[7];
        w.write_gamma(c.landmarks.len() as u64 + 1);
        for (v, s) in &c.landmarks {
            if s.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: s.len(),
                });
            }
            w.write_bits(*v as u64, idw);
            write_coords(w, "landmarks", *v, s, bound, width, true)?;
        }
    }
    // augmentations
    if let Some(aug) = &c.augmentations {
        if !h.euclidean {
            return Err(Error::Malformed("augmentations on a non-Euclidean sketch".into()));
        }
        if aug.entries.len() != layout.subtree_leaves.len() {
            return Err(Error::Malformed("one augmentation entry per subtree leaf expected".into()));
        }
        let bound = augmentation_bound(h.d);
        let width = index_width(2 * bound + 1);
        for (e, &v) in aug.entries.iter().zip(&layout.subtree_leaves) {
            for copy in &e.a {
                write_coords(&mut sections[8], "augmentations", v, copy, bound, width, false)?;
            }
            let needs_b = layout.subtree_root[v] != 0;
            match (&e.b, needs_b) {
                (Some(b), true) => {
                    for copy in b {
                        write_coords(&mut sections[8], "augmentations", v, copy, bound, width, false)?;
                    }
                }
                (None, false) => {}
                _ => {
                    return Err(Error::MissingAnnotation {
                        node: v,
                        field: "long-edge augmentation",
                    })
                }
            }
        }
    } else if h.euclidean {
        return Err(Error::MissingAnnotation {
            node: 0,
            field: "augmentations",
        });
    }

    let mut out = Vec::with_capacity(FIXED_HEADER_BYTES + sections.iter().map(|s| 8 + s.len() as usize / 8 + 1).sum::<usize>());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&h.n.to_le_bytes());
    out.extend_from_slice(&h.d.to_le_bytes());
    out.extend_from_slice(&h.norm.code().to_le_bytes());
    out.extend_from_slice(&h.eps.numerator().to_le_bytes());
    out.extend_from_slice(&h.eps.exponent().to_le_bytes());
    out.extend_from_slice(&(h.scale_exponent as u64).to_le_bytes());
    out.extend_from_slice(&(h.phi_exponent as u64).to_le_bytes());
    out.push(if h.euclidean { FLAG_EUCLIDEAN } else { 0 });
    for s in sections {
        out.extend_from_slice(&s.len().to_le_bytes());
        out.extend(s.into_bytes());
    }
    Ok(SketchBits { bytes: out })
}

/// Parses a sketch back into its contents.
pub fn decode(bits: &SketchBits) -> Result<SketchContents> {
    let h = read_header(&bits.bytes)?;
    let secs = bits.sections()?;
    let mut readers: Vec<BitReader> = secs
        .iter()
        .map(|(len, range)| BitReader::new(&bits.bytes[range.clone()], *len))
        .collect::<Result<_>>()?;
    let d = usize::try_from(h.d).map_err(|_| Error::Malformed("dimension too large".into()))?;
    let n = usize::try_from(h.n).map_err(|_| Error::Malformed("n too large".into()))?;

    // topology
    let mut nodes: Vec<NodeRecord> = Vec::new();
    {
        let r = &mut readers[0];
        let mut stack: Vec<usize> = Vec::new();
        while r.remaining() > 0 {
            if r.read_bit()? {
                if stack.is_empty() && !nodes.is_empty() {
                    return Err(Error::UnbalancedTopology);
                }
                let id = nodes.len();
                let parent = stack.last().copied();
                if let Some(p) = parent {
                    nodes[p].children.push(id);
                }
                nodes.push(NodeRecord {
                    level: 0,
                    parent,
                    children: Vec::new(),
                    edge: EdgeKind::Short,
                    center: 0,
                    ingress: id,
                    gamma_code: None,
                    eta: None,
                    eta_eps: None,
                });
                stack.push(id);
            } else if stack.pop().is_none() {
                return Err(Error::UnbalancedTopology);
            }
        }
        if nodes.is_empty() || !stack.is_empty() {
            return Err(Error::UnbalancedTopology);
        }
    }
    let m = nodes.len();

    // long edges and levels
    nodes[0].level = h.phi_exponent;
    for v in 1..m {
        let r = &mut readers[1];
        if r.read_bit()? {
            let k = r.read_gamma()?;
            if k < 2 || k > u32::MAX as u64 {
                return Err(Error::Malformed(format!("long edge of length {k}")));
            }
            nodes[v].edge = EdgeKind::Long(k as u32);
        }
        let p = nodes[v].parent.unwrap();
        let drop = match nodes[v].edge {
            EdgeKind::Short => 1,
            EdgeKind::Long(k) => k - 1,
        };
        nodes[v].level = nodes[p]
            .level
            .checked_sub(drop)
            .ok_or_else(|| Error::Malformed(format!("negative level at node {v}")))?;
    }

    // centers
    let cw = index_width(h.n);
    for (v, node) in nodes.iter_mut().enumerate() {
        let c = readers[2].read_bits(cw)? as usize;
        if c >= n {
            return Err(Error::Malformed(format!("center {c} of node {v} out of range")));
        }
        node.center = c;
    }

    let layout = Layout::new(&nodes);

    // ingresses
    let lw = index_width(layout.subtree_leaves.len() as u64);
    for v in 0..m {
        let r = &mut readers[3];
        let tag = r.read_bits(2)?;
        let ingress = match tag {
            TAG_SELF => v,
            TAG_PARENT => nodes[v]
                .parent
                .ok_or_else(|| Error::Malformed("root has a parent ingress".into()))?,
            TAG_LEAF => {
                let idx = r.read_bits(lw)? as usize;
                *layout
                    .subtree_leaves
                    .get(idx)
                    .ok_or_else(|| Error::Malformed(format!("subtree leaf index {idx}")))?
            }
            _ => return Err(Error::Malformed(format!("ingress tag {tag}"))),
        };
        if (ingress == v) != layout.is_subtree_root(v) {
            return Err(Error::Malformed(format!("bad ingress for node {v}")));
        }
        nodes[v].ingress = ingress;
    }

    // gammas, etas, leaf etas
    let widths = Widths::new(&h);
    for v in 0..m {
        if layout.is_subtree_root(v) {
            continue;
        }
        let code = readers[4].read_gamma()?;
        if code < 5 {
            return Err(Error::Malformed(format!("precision code {code} at node {v}")));
        }
        let (bound, width) = widths.eta(code)?;
        nodes[v].eta = Some(read_coords(&mut readers[5], d, bound, width)?);
        if layout.leaf_index[v].is_some() {
            let (bound, width) = widths.eta_eps(code)?;
            nodes[v].eta_eps = Some(read_coords(&mut readers[6], d, bound, width)?);
        }
        nodes[v].gamma_code = Some(code);
    }

    // landmarks
    let mut landmarks = Vec::new();
    {
        let (bound, width) = landmark_width(&h)?;
        let idw = index_width(m as u64);
        let r = &mut readers[7];
        let count = r.read_gamma()? - 1;
        for _ in 0..count {
            let v = r.read_bits(idw)? as usize;
            if v >= m {
                return Err(Error::Malformed(format!("landmark id {v} out of range")));
            }
            landmarks.push((v, read_coords(r, d, bound, width)?));
        }
    }

    // augmentations
    let augmentations = if h.euclidean {
        let bound = augmentation_bound(h.d);
        let width = index_width(2 * bound + 1);
        let r = &mut readers[8];
        let mut entries = Vec::with_capacity(layout.subtree_leaves.len());
        for &v in &layout.subtree_leaves {
            let a = [read_coords(r, d, bound, width)?, read_coords(r, d, bound, width)?];
            let b = if layout.subtree_root[v] != 0 {
                Some([read_coords(r, d, bound, width)?, read_coords(r, d, bound, width)?])
            } else {
                None
            };
            entries.push(AugEntry { a, b });
        }
        Some(AugmentationTable { entries })
    } else {
        None
    };

    for (name, r) in SECTION_NAMES.iter().zip(&readers) {
        if r.remaining() != 0 {
            return Err(Error::Malformed(format!("{} unread bits in {name}", r.remaining())));
        }
    }

    Ok(SketchContents {
        header: h,
        nodes,
        landmarks,
        augmentations,
    })
}
