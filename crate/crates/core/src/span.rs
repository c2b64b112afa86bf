//! Source locations.

use std::fmt;

/// A byte range in a source file plus the 1-based line and column of its
/// start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    /// Computes line and column from the source text.
    pub fn locate(src: &str, start: usize, end: usize) -> Self {
        let before = &src[..start.min(src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(before.chars().count(), |nl| {
            before[nl + 1..].chars().count()
        }) + 1;
        SourceSpan {
            start,
            end,
            line,
            column,
        }
    }

    /// The smallest span covering both.
    pub fn join(self, other: SourceSpan) -> SourceSpan {
        if other.start < self.start {
            SourceSpan {
                end: self.end.max(other.end),
                ..other
            }
        } else {
            SourceSpan {
                end: self.end.max(other.end),
                ..self
            }
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locates_lines_and_columns() {
        let src = "ab\ncd\nef";
        let s = SourceSpan::locate(src, 4, 5);
        assert_eq!((s.line, s.column), (2, 2));
        let s = SourceSpan::locate(src, 0, 1);
        assert_eq!((s.line, s.column), (1, 1));
    }

    #[test]
    fn join_covers_both() {
        let a = SourceSpan::locate("abcdef", 2, 3);
        let b = SourceSpan::locate("abcdef", 0, 1);
        let j = a.join(b);
        assert_eq!((j.start, j.end, j.column), (0, 3, 1));
    }
}
