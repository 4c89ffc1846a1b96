use serde::{Deserialize, Serialize};
use std::ops::Range;

/// A named block of the flat parameter vector, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len()
    }

    /// Biases and other single-column blocks are not randomly initialized.
    pub fn is_bias(&self) -> bool {
        self.cols == 1
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    segments: Vec<Segment>,
}

impl Layout {
    /// Appends a block and returns its range.
    pub fn push(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> Range<usize> {
        let seg = Segment {
            name: name.into(),
            offset: self.total(),
            rows,
            cols,
        };
        let range = seg.range();
        self.segments.push(seg);
        range
    }

    pub fn total(&self) -> usize {
        self.segments.last().map(|s| s.offset + s.len()).unwrap_or(0)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn get(&self, name: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.name == name)
    }
}
