use std::collections::HashMap;

use super::word::Word;
use super::FreeAlgError;

/// Default cap on enumerated word counts. Hitting it signals that the
/// requested relaxation order is too large to assemble.
pub const DEFAULT_WORD_LIMIT: usize = 2_000_000;

/// All words of degree at most `d` in `n` letters, in graded
/// lexicographic order, with an index for constant-time lookup.
///
/// The basis has `s(d, n) = sum_{i=0}^{d} n^i` words; position 0 is the
/// empty word.
#[derive(Clone, Debug)]
pub struct WordBasis {
    nvars: usize,
    degree: usize,
    words: Vec<Word>,
    index: HashMap<Word, usize>,
}

impl WordBasis {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &Word {
        &self.words[i]
    }

    pub fn position(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }
}

/// Number of words of degree at most `d` in `n` letters, or `None` on
/// overflow.
pub fn basis_size(n: usize, d: usize) -> Option<u128> {
    let mut total: u128 = 0;
    let mut pow: u128 = 1;
    for _ in 0..=d {
        total = total.checked_add(pow)?;
        pow = pow.checked_mul(n as u128)?;
    }
    Some(total)
}

pub fn enumerate_basis(n: usize, d: usize) -> Result<WordBasis, FreeAlgError> {
    enumerate_basis_with_limit(n, d, DEFAULT_WORD_LIMIT)
}

pub fn enumerate_basis_with_limit(
    n: usize,
    d: usize,
    limit: usize,
) -> Result<WordBasis, FreeAlgError> {
    if n == 0 {
        return Err(FreeAlgError::NoVariables);
    }
    let size = basis_size(n, d).unwrap_or(u128::MAX);
    if size > limit as u128 {
        return Err(FreeAlgError::BasisTooLarge {
            nvars: n,
            degree: d,
            size,
            limit,
        });
    }
    let size = size as usize;
    let mut words = Vec::with_capacity(size);
    words.push(Word::empty());
    let mut level_start = 0;
    for _ in 1..=d {
        let level_end = words.len();
        // extending each word of the previous level in letter order keeps
        // each level lexicographically sorted
        for i in level_start..level_end {
            for l in 1..=n as u32 {
                let mut letters = words[i].letters().to_vec();
                letters.push(l);
                words.push(Word::from_letters(letters));
            }
        }
        level_start = level_end;
    }
    debug_assert_eq!(words.len(), size);
    let index = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();
    Ok(WordBasis {
        nvars: n,
        degree: d,
        words,
        index,
    })
}
