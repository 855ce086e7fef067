//! Mixed-radix indexing of joint outcomes.
//!
//! A joint outcome `(o_1, ..., o_n)` is stored at a flat index where the
//! last position increments fastest, so `[000], [001], [010], ...` for three
//! binary observers.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct Shape {
    radices: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl From<Vec<usize>> for Shape {
    fn from(radices: Vec<usize>) -> Self {
        Shape::new(radices)
    }
}

impl From<Shape> for Vec<usize> {
    fn from(shape: Shape) -> Self {
        shape.radices
    }
}

impl Shape {
    pub fn new(radices: Vec<usize>) -> Self {
        let mut strides = vec![0; radices.len()];
        let mut acc = 1usize;
        for (pos, &r) in radices.iter().enumerate().rev() {
            strides[pos] = acc;
            acc = acc
                .checked_mul(r)
                .expect("joint outcome space overflows usize");
        }
        Shape {
            radices,
            strides,
            len: acc,
        }
    }

    /// Number of joint outcomes.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of positions (observers).
    pub fn arity(&self) -> usize {
        self.radices.len()
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn radix(&self, pos: usize) -> usize {
        self.radices[pos]
    }

    pub fn stride(&self, pos: usize) -> usize {
        self.strides[pos]
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.radices.len());
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        (0..self.arity()).map(|p| self.digit(index, p)).collect()
    }

    pub fn digit(&self, index: usize, pos: usize) -> usize {
        (index / self.strides[pos]) % self.radices[pos]
    }

    /// Shape of the sub-tuple at `positions` (in the given order).
    pub fn project_shape(&self, positions: &[usize]) -> Shape {
        Shape::new(positions.iter().map(|&p| self.radices[p]).collect())
    }

    /// Flat index of the sub-tuple of `index` at `positions`.
    pub fn project(&self, index: usize, positions: &[usize]) -> usize {
        let mut acc = 0;
        for &p in positions {
            acc = acc * self.radices[p] + self.digit(index, p);
        }
        acc
    }

    /// Renders a joint outcome as a digit string, e.g. `"011"`.
    pub fn label(&self, index: usize) -> String {
        self.decode(index)
            .iter()
            .map(|&d| outcome_char(d))
            .collect()
    }

    /// Parses a digit string produced by [`Shape::label`].
    pub fn parse_label(&self, label: &str) -> Option<usize> {
        let digits: Vec<usize> = label.chars().map(outcome_digit).collect::<Option<_>>()?;
        if digits.len() != self.arity() || digits.iter().zip(&self.radices).any(|(d, r)| d >= r) {
            return None;
        }
        Some(self.encode(&digits))
    }
}

/// Outcome symbols: `0-9` then `a-z`.
pub fn outcome_char(d: usize) -> char {
    std::char::from_digit(d as u32, 36).expect("outcome beyond base-36 alphabet")
}

pub fn outcome_digit(c: char) -> Option<usize> {
    c.to_digit(36).map(|d| d as usize)
}

/// Precomputed projection of a shape onto a subset of positions, split into
/// two additive lookup tables so that `project(x)` is two loads and an add.
#[derive(Debug, Clone)]
pub struct Projector {
    split: usize,
    high: Vec<u32>,
    low: Vec<u32>,
}

impl Projector {
    pub fn new(shape: &Shape, positions: &[usize]) -> Self {
        let arity = shape.arity();
        // positions >= cut live in the low table
        let mut cut = arity;
        let mut low_len = 1usize;
        while cut > 0 && low_len * shape.radix(cut - 1) <= 1 << 10 {
            cut -= 1;
            low_len *= shape.radix(cut);
        }
        let split = low_len;
        let sub = shape.project_shape(positions);
        let weight = |p: usize| -> Option<usize> {
            positions
                .iter()
                .position(|&q| q == p)
                .map(|k| sub.stride(k))
        };
        let high_len = shape.len() / split;
        let mut high = vec![0u32; high_len];
        for (h, slot) in high.iter_mut().enumerate() {
            let x = h * split;
            *slot = (0..cut)
                .filter_map(|p| weight(p).map(|w| w * shape.digit(x, p)))
                .sum::<usize>() as u32;
        }
        let mut low = vec![0u32; split];
        for (l, slot) in low.iter_mut().enumerate() {
            *slot = (cut..arity)
                .filter_map(|p| weight(p).map(|w| w * shape.digit(l, p)))
                .sum::<usize>() as u32;
        }
        Projector { split, high, low }
    }

    #[inline]
    pub fn project(&self, index: usize) -> usize {
        (self.high[index / self.split] + self.low[index % self.split]) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_position_is_fastest() {
        let s = Shape::new(vec![2, 2, 2]);
        assert_eq!(s.len(), 8);
        assert_eq!(s.encode(&[0, 0, 1]), 1);
        assert_eq!(s.encode(&[1, 0, 0]), 4);
        assert_eq!(s.label(3), "011");
        assert_eq!(s.parse_label("110"), Some(6));
        assert_eq!(s.parse_label("12"), None);
    }

    #[test]
    fn mixed_radix_round_trip() {
        let s = Shape::new(vec![3, 2, 4]);
        for i in 0..s.len() {
            assert_eq!(s.encode(&s.decode(i)), i);
        }
    }

    #[test]
    fn projector_matches_direct_projection() {
        let s = Shape::new(vec![2, 3, 2, 2, 3, 2, 2, 2, 2, 2, 2, 2, 2]);
        let pos = [4, 0, 9, 12];
        let proj = Projector::new(&s, &pos);
        for i in (0..s.len()).step_by(7) {
            assert_eq!(proj.project(i), s.project(i, &pos));
        }
    }
}
