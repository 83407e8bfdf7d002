//! Token alignment by longest common subsequence.
//!
//! Matches become copies; inside each unmatched gap, source and target tokens
//! are paired in order as substitutions, and leftovers become deletions or
//! insertions. Traceback prefers copy, then delete, then insert.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    Copy { src: usize, tgt: usize },
    Substitute { src: usize, tgt: usize },
    Delete { src: usize },
    Insert { tgt: usize },
}

impl EditOp {
    pub fn tgt(&self) -> Option<usize> {
        match *self {
            EditOp::Copy { tgt, .. } | EditOp::Substitute { tgt, .. } | EditOp::Insert { tgt } => {
                Some(tgt)
            }
            EditOp::Delete { .. } => None,
        }
    }
}

/// Aligns two token sequences, comparing tokens case-insensitively.
pub fn align<S: AsRef<str>>(source: &[S], target: &[S]) -> Vec<EditOp> {
    let src: Vec<String> = source.iter().map(|t| t.as_ref().to_lowercase()).collect();
    let tgt: Vec<String> = target.iter().map(|t| t.as_ref().to_lowercase()).collect();
    let (n, m) = (src.len(), tgt.len());

    // suffix LCS table, row-major (n+1) x (m+1)
    let w = m + 1;
    let mut dp = vec![0u32; (n + 1) * w];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            dp[i * w + j] = if src[i] == tgt[j] {
                dp[(i + 1) * w + j + 1] + 1
            } else {
                dp[(i + 1) * w + j].max(dp[i * w + j + 1])
            };
        }
    }

    let mut raw = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        if i < n && j < m && src[i] == tgt[j] && dp[i * w + j] == dp[(i + 1) * w + j + 1] + 1 {
            raw.push(EditOp::Copy { src: i, tgt: j });
            i += 1;
            j += 1;
        } else if i < n && (j == m || dp[(i + 1) * w + j] == dp[i * w + j]) {
            raw.push(EditOp::Delete { src: i });
            i += 1;
        } else {
            raw.push(EditOp::Insert { tgt: j });
            j += 1;
        }
    }
    pair_gaps(raw)
}

fn pair_gaps(raw: Vec<EditOp>) -> Vec<EditOp> {
    let mut out = Vec::with_capacity(raw.len());
    let mut gap: Vec<EditOp> = Vec::new();
    let flush = |gap: &mut Vec<EditOp>, out: &mut Vec<EditOp>| {
        let dels: Vec<usize> = gap
            .iter()
            .filter_map(|op| match op {
                EditOp::Delete { src } => Some(*src),
                _ => None,
            })
            .collect();
        let ins: Vec<usize> = gap
            .iter()
            .filter_map(|op| match op {
                EditOp::Insert { tgt } => Some(*tgt),
                _ => None,
            })
            .collect();
        let paired = dels.len().min(ins.len());
        for k in 0..paired {
            out.push(EditOp::Substitute {
                src: dels[k],
                tgt: ins[k],
            });
        }
        out.extend(dels[paired..].iter().map(|&src| EditOp::Delete { src }));
        out.extend(ins[paired..].iter().map(|&tgt| EditOp::Insert { tgt }));
        gap.clear();
    };
    for op in raw {
        match op {
            EditOp::Copy { .. } => {
                flush(&mut gap, &mut out);
                out.push(op);
            }
            _ => gap.push(op),
        }
    }
    flush(&mut gap, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn identity_alignment() {
        let x = t("The cat sat on the mat");
        let ops = align(&x, &x);
        assert_eq!(ops.len(), x.len());
        for (k, op) in ops.iter().enumerate() {
            assert_eq!(*op, EditOp::Copy { src: k, tgt: k });
        }
    }

    #[test]
    fn substitution_and_deletion() {
        let ops = align(&t("I will purchase very good food"), &t("I will buy good food"));
        assert_eq!(
            ops,
            vec![
                EditOp::Copy { src: 0, tgt: 0 },
                EditOp::Copy { src: 1, tgt: 1 },
                EditOp::Substitute { src: 2, tgt: 2 },
                EditOp::Delete { src: 3 },
                EditOp::Copy { src: 4, tgt: 3 },
                EditOp::Copy { src: 5, tgt: 4 },
            ]
        );
    }

    #[test]
    fn case_insensitive_and_insertions() {
        let ops = align(&t("and the goat ran"), &t("The goat ran away"));
        assert_eq!(
            ops,
            vec![
                EditOp::Delete { src: 0 },
                EditOp::Copy { src: 1, tgt: 0 },
                EditOp::Copy { src: 2, tgt: 1 },
                EditOp::Copy { src: 3, tgt: 2 },
                EditOp::Insert { tgt: 3 },
            ]
        );
        assert!(align::<&str>(&[], &[]).is_empty());
    }

    #[test]
    fn every_token_is_covered_once() {
        let (s, g) = (t("a b c a b d e"), t("b a x d e e f"));
        let ops = align(&s, &g);
        let mut src_seen = vec![0; s.len()];
        let mut tgt_seen = vec![0; g.len()];
        for op in &ops {
            match *op {
                EditOp::Copy { src, tgt } | EditOp::Substitute { src, tgt } => {
                    src_seen[src] += 1;
                    tgt_seen[tgt] += 1;
                }
                EditOp::Delete { src } => src_seen[src] += 1,
                EditOp::Insert { tgt } => tgt_seen[tgt] += 1,
            }
        }
        assert!(src_seen.iter().chain(&tgt_seen).all(|&c| c == 1));
    }
}
