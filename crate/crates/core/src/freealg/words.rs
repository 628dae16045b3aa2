use std::collections::HashMap;
use std::fmt;

use super::FreeError;

/// Highest supported truncation degree.
pub const MAX_DEGREE: usize = 4;

/// A bracket word in the generators, `Gen(a)` or `Pair(u, v)` for `[u, v]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum HallWord {
    Gen(usize),
    Pair(Box<HallWord>, Box<HallWord>),
}

impl HallWord {
    pub fn degree(&self) -> usize {
        match self {
            HallWord::Gen(_) => 1,
            HallWord::Pair(u, v) => u.degree() + v.degree(),
        }
    }
}

impl fmt::Display for HallWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HallWord::Gen(a) => write!(f, "e{}", a + 1),
            HallWord::Pair(u, v) => write!(f, "[{u},{v}]"),
        }
    }
}

/// Words of a fixed family, indexed in the total order used throughout:
/// by degree, then lexicographically on `(left, right)` indices, with
/// generators ordered by their index.
#[derive(Clone, Debug)]
pub struct WordTable {
    pub generators: usize,
    /// `None` for a generator, `Some((u, v))` for `[u, v]` with `u > v`.
    pub parts: Vec<Option<(usize, usize)>>,
    pub degrees: Vec<usize>,
    lookup: HashMap<(usize, usize), usize>,
}

/// The ordering convention, recorded in reports.
pub const HALL_ORDER: &str =
    "by degree, then lexicographic on (left, right); generators by index; [u,v] requires u > v";

impl WordTable {
    /// Anticommutative magma words `[u, v]`, `u > v`, up to degree `d`.
    pub fn magma(r: usize, d: usize) -> WordTable {
        Self::build(r, d, |_, _, _| true)
    }

    /// Hall words: magma words where additionally `u = [u1, u2]` implies `u2 <= v`.
    pub fn hall(r: usize, d: usize) -> WordTable {
        Self::build(r, d, |t, u, v| match t[u] {
            None => true,
            Some((_, u2)) => u2 <= v,
        })
    }

    fn build(r: usize, d: usize, admit: impl Fn(&[Option<(usize, usize)>], usize, usize) -> bool) -> WordTable {
        let mut parts: Vec<Option<(usize, usize)>> = vec![None; r];
        let mut degrees = vec![1; r];
        let mut lookup = HashMap::new();
        for k in 2..=d {
            let mut fresh = Vec::new();
            for u in 0..parts.len() {
                for v in 0..u {
                    if degrees[u] + degrees[v] == k && admit(&parts, u, v) {
                        fresh.push((u, v));
                    }
                }
            }
            fresh.sort_unstable();
            for pair in fresh {
                lookup.insert(pair, parts.len());
                parts.push(Some(pair));
                degrees.push(k);
            }
        }
        WordTable { generators: r, parts, degrees, lookup }
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Number of words of each degree `1..=d`.
    pub fn counts(&self, d: usize) -> Vec<usize> {
        (1..=d).map(|k| self.degrees.iter().filter(|&&x| x == k).count()).collect()
    }

    pub fn index_of(&self, u: usize, v: usize) -> Option<usize> {
        self.lookup.get(&(u, v)).copied()
    }

    pub fn word(&self, i: usize) -> HallWord {
        match self.parts[i] {
            None => HallWord::Gen(i),
            Some((u, v)) => HallWord::Pair(Box::new(self.word(u)), Box::new(self.word(v))),
        }
    }

    /// Antisymmetric normal form of `[u, v]`: `(sign, index)`, or `None` when it
    /// vanishes or exceeds the table.
    pub fn bracket(&self, u: usize, v: usize) -> Option<(f64, usize)> {
        match u.cmp(&v) {
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => self.index_of(u, v).map(|w| (1.0, w)),
            std::cmp::Ordering::Less => self.index_of(v, u).map(|w| (-1.0, w)),
        }
    }
}

fn check_range(r: usize, d: usize) -> Result<(), FreeError> {
    if r == 0 {
        return Err(FreeError::Degree("at least one generator is required".into()));
    }
    if !(1..=MAX_DEGREE).contains(&d) {
        return Err(FreeError::Degree(format!("degree {d} outside 1..={MAX_DEGREE}")));
    }
    Ok(())
}

/// Hall basis of the free Lie algebra on `r` generators, grouped by degree `1..=d`.
pub fn hall_basis(r: usize, d: usize) -> Result<Vec<Vec<HallWord>>, FreeError> {
    check_range(r, d)?;
    Ok(group(&WordTable::hall(r, d), d))
}

/// Basis of the free anticommutative magma, grouped by degree `1..=d`.
pub fn magma_basis(r: usize, d: usize) -> Result<Vec<Vec<HallWord>>, FreeError> {
    check_range(r, d)?;
    Ok(group(&WordTable::magma(r, d), d))
}

fn group(t: &WordTable, d: usize) -> Vec<Vec<HallWord>> {
    (1..=d).map(|k| (0..t.len()).filter(|&i| t.degrees[i] == k).map(|i| t.word(i)).collect()).collect()
}

fn mobius(mut n: usize) -> i64 {
    let mut out = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            out = -out;
        }
        p += 1;
    }
    if n > 1 {
        out = -out;
    }
    out
}

/// Dimension of the degree-`d` part of the free Lie algebra on `r` generators.
pub fn witt(r: usize, d: usize) -> usize {
    let total: i64 = (1..=d).filter(|&e| d.is_multiple_of(e)).map(|e| mobius(e) * (r as i64).pow((d / e) as u32)).sum();
    (total / d as i64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witt_values() {
        assert_eq!((1..=4).map(|d| witt(2, d)).collect::<Vec<_>>(), [2, 1, 2, 3]);
        assert_eq!((1..=4).map(|d| witt(3, d)).collect::<Vec<_>>(), [3, 3, 8, 18]);
        assert_eq!((1..=3).map(|d| witt(1, d)).collect::<Vec<_>>(), [1, 0, 0]);
    }

    #[test]
    fn magma_counts() {
        assert_eq!(WordTable::magma(2, 4).counts(4), [2, 1, 2, 4]);
        assert_eq!(WordTable::magma(3, 3).counts(3), [3, 3, 9]);
    }

    #[test]
    fn words_display() {
        let t = WordTable::hall(2, 3);
        let names: Vec<String> = (0..t.len()).map(|i| t.word(i).to_string()).collect();
        assert_eq!(names, ["e1", "e2", "[e2,e1]", "[[e2,e1],e1]", "[[e2,e1],e2]"]);
    }

    #[test]
    fn bracket_sign() {
        let t = WordTable::magma(2, 2);
        assert_eq!(t.bracket(1, 0), Some((1.0, 2)));
        assert_eq!(t.bracket(0, 1), Some((-1.0, 2)));
        assert_eq!(t.bracket(1, 1), None);
        assert_eq!(t.bracket(2, 0), None);
    }
}
