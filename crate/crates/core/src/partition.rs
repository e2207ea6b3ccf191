//! Coarsest stable partition refinement over labelled transition graphs.

use std::collections::VecDeque;

use crate::event::EventId;

/// Refines `initial` (one block id per state) until every block is stable
/// with respect to every `(event, block)` splitter: for each event `e` and
/// block `B`, a block either lies entirely inside `pre_e(B)` or is disjoint
/// from it. Returns block ids numbered by first occurrence in state order.
pub(crate) fn coarsest_stable(initial: &[usize], edges: &[(usize, EventId, usize)]) -> Vec<usize> {
    let n = initial.len();
    let mut block_of = canonical(initial);
    let num_blocks = block_of.iter().copied().max().map_or(0, |m| m + 1);
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); num_blocks];
    for (x, &b) in block_of.iter().enumerate() {
        blocks[b].push(x);
    }

    let mut rev: Vec<Vec<(EventId, usize)>> = vec![Vec::new(); n];
    for &(x, e, y) in edges {
        rev[y].push((e, x));
    }

    let mut queue: VecDeque<usize> = (0..blocks.len()).collect();
    let mut queued = vec![true; blocks.len()];
    let mut hits = vec![0usize; n];
    let mut in_pre = vec![false; n];

    while let Some(splitter) = queue.pop_front() {
        queued[splitter] = false;
        let mut pre: Vec<(EventId, usize)> = blocks[splitter]
            .iter()
            .flat_map(|&y| rev[y].iter().copied())
            .collect();
        pre.sort_unstable();
        pre.dedup();

        for group in pre.chunk_by(|l, r| l.0 == r.0) {
            let mut touched = Vec::new();
            for &(_, x) in group {
                in_pre[x] = true;
                let b = block_of[x];
                if hits[b] == 0 {
                    touched.push(b);
                }
                hits[b] += 1;
            }
            for b in touched {
                if hits[b] < blocks[b].len() {
                    let (inside, outside): (Vec<usize>, Vec<usize>) =
                        blocks[b].iter().copied().partition(|&x| in_pre[x]);
                    let fresh = blocks.len();
                    for &x in &inside {
                        block_of[x] = fresh;
                    }
                    blocks[b] = outside;
                    blocks.push(inside);
                    queued.push(false);
                    for id in [b, fresh] {
                        if !queued[id] {
                            queued[id] = true;
                            queue.push_back(id);
                        }
                    }
                }
                hits[b] = 0;
            }
            for &(_, x) in group {
                in_pre[x] = false;
            }
        }
    }
    canonical(&block_of)
}

fn canonical(ids: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    ids.iter()
        .map(|&b| {
            let next = map.len();
            *map.entry(b).or_insert(next)
        })
        .collect()
}
