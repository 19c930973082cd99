use std::cmp::Ordering;
use std::fmt;

/// A word in the free monoid on letters `x1, ..., xn`.
///
/// Letters are stored as 1-based indices; the empty word is the monoid
/// identity. Words are totally ordered by graded lexicographic order:
/// shorter words come first, words of equal length compare letterwise.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<u32>,
}

impl Word {
    /// The empty word `1`.
    pub fn empty() -> Self {
        Word { letters: Vec::new() }
    }

    /// The single-letter word `x_i` (1-based).
    pub fn letter(i: u32) -> Self {
        assert!(i >= 1, "letters are 1-based");
        Word { letters: vec![i] }
    }

    pub fn from_letters(letters: Vec<u32>) -> Self {
        assert!(letters.iter().all(|&l| l >= 1), "letters are 1-based");
        Word { letters }
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    /// Degree of the word, i.e. its length.
    pub fn degree(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Largest letter index appearing in the word, or 0 for the empty word.
    pub fn max_letter(&self) -> u32 {
        self.letters.iter().copied().max().unwrap_or(0)
    }

    /// The involution `w*`: the reverse of the word.
    pub fn star(&self) -> Word {
        let mut letters = self.letters.clone();
        letters.reverse();
        Word { letters }
    }

    /// Free-monoid product: concatenation of `self` and `other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.letters.len() + other.letters.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    /// Left rotation of the word by `k` positions.
    pub fn rotation(&self, k: usize) -> Word {
        if self.letters.is_empty() {
            return self.clone();
        }
        let k = k % self.letters.len();
        let mut letters = Vec::with_capacity(self.letters.len());
        letters.extend_from_slice(&self.letters[k..]);
        letters.extend_from_slice(&self.letters[..k]);
        Word { letters }
    }
}

/// Free-monoid product of two words (concatenation).
pub fn word_mul(u: &Word, v: &Word) -> Word {
    u.concat(v)
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut run = 1;
            while i + run < self.letters.len() && self.letters[i + run] == l {
                run += 1;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if run == 1 {
                write!(f, "x{}", l)?;
            } else {
                write!(f, "x{}^{}", l, run)?;
            }
            i += run;
        }
        Ok(())
    }
}

/// Canonical representative of the cyclic equivalence class of `w`:
/// the graded-lex least word among all rotations of `w` and all rotations
/// of `w*`. Closing under the involution as well matches tracial
/// functionals, which satisfy both `L(f) = L(f*)` and `L([p, q]) = 0`.
pub fn cyclic_canonical(w: &Word) -> Word {
    let mut best = w.clone();
    let star = w.star();
    for k in 0..w.degree().max(1) {
        let r = w.rotation(k);
        if r < best {
            best = r;
        }
        let rs = star.rotation(k);
        if rs < best {
            best = rs;
        }
    }
    best
}

/// A cyclic equivalence class, named by its canonical representative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicClass {
    pub canonical: Word,
}

impl CyclicClass {
    pub fn of(w: &Word) -> Self {
        CyclicClass {
            canonical: cyclic_canonical(w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(letters: &[u32]) -> Word {
        Word::from_letters(letters.to_vec())
    }

    #[test]
    fn concatenation() {
        assert_eq!(word_mul(&w(&[1]), &w(&[2])), w(&[1, 2]));
        assert_eq!(word_mul(&Word::empty(), &w(&[2, 1])), w(&[2, 1]));
        // x2 x1 * x1 x2 = x2 x1^2 x2
        assert_eq!(word_mul(&w(&[2, 1]), &w(&[1, 2])), w(&[2, 1, 1, 2]));
    }

    #[test]
    fn involution_reverses() {
        assert_eq!(w(&[1, 2, 2]).star(), w(&[2, 2, 1]));
        assert_eq!(Word::empty().star(), Word::empty());
        assert_eq!(w(&[1]).star(), w(&[1]));
    }

    #[test]
    fn graded_lex_order() {
        assert!(Word::empty() < w(&[1]));
        assert!(w(&[2]) < w(&[1, 1]));
        assert!(w(&[1, 2]) < w(&[2, 1]));
        assert!(w(&[1, 1, 2]) < w(&[1, 2, 1]));
    }

    #[test]
    fn cyclic_canonical_examples() {
        // xy ~ yx
        assert_eq!(cyclic_canonical(&w(&[1, 2])), w(&[1, 2]));
        assert_eq!(cyclic_canonical(&w(&[2, 1])), w(&[1, 2]));
        // rotations of xyyx are {xyyx, yyxx, yxxy, xxyy}; least is xxyy
        assert_eq!(cyclic_canonical(&w(&[1, 2, 2, 1])), w(&[1, 1, 2, 2]));
        assert_eq!(cyclic_canonical(&Word::empty()), Word::empty());
    }

    #[test]
    fn cyclic_canonical_brute_force() {
        // Independent oracle: enumerate the closure and take the minimum.
        for letters in [
            vec![1, 2, 3],
            vec![2, 1, 2, 1],
            vec![3, 1, 2],
            vec![1, 2, 2, 1, 3],
        ] {
            let word = w(&letters);
            let mut members = Vec::new();
            for k in 0..word.degree() {
                members.push(word.rotation(k));
                members.push(word.star().rotation(k));
            }
            members.sort();
            assert_eq!(cyclic_canonical(&word), members[0]);
        }
    }

    #[test]
    fn display_groups_powers() {
        assert_eq!(w(&[2, 1, 1, 2]).to_string(), "x2*x1^2*x2");
        assert_eq!(Word::empty().to_string(), "1");
    }
}
