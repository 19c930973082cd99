//! SDPA sparse format (`.dat-s`) reader and writer.
//!
//! Layout: after optional comment lines (prefixed `"` or `*`), the file
//! gives the constraint count, the number of blocks, the block sizes
//! (negative for diagonal blocks), the right-hand-side vector, and then
//! one line `matno blkno i j value` per nonzero upper-triangular entry,
//! with `matno` 0 for the objective and `1..k` for the constraints.
//! Output ordering is deterministic (matno, blkno, i, j ascending) and
//! numbers carry 17 significant digits, so exporting and re-importing
//! reproduces the problem bit for bit.

use super::{Block, SdpError, SdpProblem, SparseSymMat};

/// Formats with 17 significant digits; round-trips any finite `f64`.
fn fmt17(v: f64) -> String {
    format!("{:.16e}", v)
}

pub fn export_sdpa(p: &SdpProblem) -> Result<String, SdpError> {
    if p.num_constraints() == 0 {
        return Err(SdpError::EmptyProblem);
    }
    let mut out = String::new();
    out.push_str(&format!("{}\n", p.num_constraints()));
    out.push_str(&format!("{}\n", p.blocks.len()));
    let sizes: Vec<String> = p
        .blocks
        .iter()
        .map(|b| match b {
            Block::Psd(n) => format!("{}", n),
            Block::Diag(n) => format!("-{}", n),
        })
        .collect();
    out.push_str(&sizes.join(" "));
    out.push('\n');
    let bs: Vec<String> = p.b.iter().map(|v| fmt17(*v)).collect();
    out.push_str(&bs.join(" "));
    out.push('\n');

    let write_mat = |matno: usize, m: &SparseSymMat, out: &mut String| {
        for (blk, entries) in m.blocks.iter().enumerate() {
            for &(i, j, v) in entries {
                out.push_str(&format!(
                    "{} {} {} {} {}\n",
                    matno,
                    blk + 1,
                    i + 1,
                    j + 1,
                    fmt17(v)
                ));
            }
        }
    };
    write_mat(0, &p.c, &mut out);
    for (j, aj) in p.a.iter().enumerate() {
        write_mat(j + 1, aj, &mut out);
    }
    Ok(out)
}

/// Splits a block-structure or vector line on whitespace and the
/// punctuation SDPA permits there.
fn tokens(line: &str) -> Vec<&str> {
    line.split(|c: char| c.is_whitespace() || matches!(c, ',' | '(' | ')' | '{' | '}'))
        .filter(|t| !t.is_empty())
        .collect()
}

pub fn import_sdpa(text: &str) -> Result<SdpProblem, SdpError> {
    let mut header: Vec<(usize, String)> = Vec::new();
    let mut entry_lines: Vec<(usize, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('"') || line.starts_with('*') {
            continue;
        }
        if header.len() < 4 {
            header.push((lineno + 1, line.to_string()));
        } else {
            entry_lines.push((lineno + 1, line.to_string()));
        }
    }
    if header.len() < 4 {
        let line = header.last().map_or(1, |(n, _)| *n);
        return Err(SdpError::Parse {
            line,
            message: "file ends before the four header lines".into(),
        });
    }

    let (l1, k_line) = &header[0];
    let k: usize = tokens(k_line)
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| SdpError::Parse {
            line: *l1,
            message: "expected the number of constraint matrices".into(),
        })?;

    let (l2, nb_line) = &header[1];
    let nblocks: usize = tokens(nb_line)
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| SdpError::Parse {
            line: *l2,
            message: "expected the number of blocks".into(),
        })?;

    let (l3, blk_line) = &header[2];
    let blk_tokens = tokens(blk_line);
    if blk_tokens.len() != nblocks {
        return Err(SdpError::Parse {
            line: *l3,
            message: format!(
                "expected {} block sizes, found {}",
                nblocks,
                blk_tokens.len()
            ),
        });
    }
    let mut blocks = Vec::with_capacity(nblocks);
    for t in &blk_tokens {
        let v: i64 = t.parse().map_err(|_| SdpError::Parse {
            line: *l3,
            message: format!("bad block size '{}'", t),
        })?;
        if v == 0 {
            return Err(SdpError::Parse {
                line: *l3,
                message: "zero block size".into(),
            });
        }
        blocks.push(if v > 0 {
            Block::Psd(v as usize)
        } else {
            Block::Diag((-v) as usize)
        });
    }

    let (l4, b_line) = &header[3];
    let b_tokens = tokens(b_line);
    if b_tokens.len() != k {
        return Err(SdpError::Parse {
            line: *l4,
            message: format!(
                "expected {} right-hand-side entries, found {}",
                k,
                b_tokens.len()
            ),
        });
    }
    let mut b = Vec::with_capacity(k);
    for t in &b_tokens {
        b.push(t.parse::<f64>().map_err(|_| SdpError::Parse {
            line: *l4,
            message: format!("bad right-hand-side entry '{}'", t),
        })?);
    }

    let mut entries: Vec<Vec<(usize, u32, u32, f64)>> = vec![Vec::new(); k + 1];
    for (lineno, line) in &entry_lines {
        let ts = tokens(line);
        if ts.len() != 5 {
            return Err(SdpError::Parse {
                line: *lineno,
                message: format!("expected 'matno blkno i j value', found {} fields", ts.len()),
            });
        }
        let parse_idx = |t: &str, what: &str| -> Result<usize, SdpError> {
            t.parse().map_err(|_| SdpError::Parse {
                line: *lineno,
                message: format!("bad {} '{}'", what, t),
            })
        };
        let matno = parse_idx(ts[0], "matrix number")?;
        let blkno = parse_idx(ts[1], "block number")?;
        let i = parse_idx(ts[2], "row index")?;
        let j = parse_idx(ts[3], "column index")?;
        let v: f64 = ts[4].parse().map_err(|_| SdpError::Parse {
            line: *lineno,
            message: format!("bad value '{}'", ts[4]),
        })?;
        if matno > k {
            return Err(SdpError::Parse {
                line: *lineno,
                message: format!("matrix number {} exceeds constraint count {}", matno, k),
            });
        }
        if blkno == 0 || blkno > nblocks {
            return Err(SdpError::Parse {
                line: *lineno,
                message: format!("block number {} out of range 1..{}", blkno, nblocks),
            });
        }
        let size = blocks[blkno - 1].size();
        if i == 0 || j == 0 || i > size || j > size {
            return Err(SdpError::Parse {
                line: *lineno,
                message: format!("entry ({}, {}) outside {}x{} block {}", i, j, size, size, blkno),
            });
        }
        entries[matno].push((blkno - 1, (i - 1) as u32, (j - 1) as u32, v));
    }

    let mut mats = entries
        .into_iter()
        .map(|e| SparseSymMat::from_entries(nblocks, e));
    let c = mats.next().expect("objective entries");
    let a: Vec<SparseSymMat> = mats.collect();
    SdpProblem::new(blocks, c, a, b)
}
