/// Strongly connected components by Tarjan's algorithm, iteratively (box
/// graphs are far too deep for recursion).
///
/// Returns a component id per node; ids are numbered by the smallest node in
/// each component, so the labelling is canonical.
pub fn tarjan_scc(adj: &[Vec<u32>]) -> Vec<u32> {
    const UNSEEN: u32 = u32::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut raw = vec![UNSEEN; n];
    let mut next_index = 0u32;
    let mut next_comp = 0u32;
    // (node, position in its successor list)
    let mut call: Vec<(u32, usize)> = Vec::new();

    for root in 0..n as u32 {
        if index[root as usize] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let vu = v as usize;
            if let Some(&w) = adj[vu].get(*pos) {
                *pos += 1;
                let wu = w as usize;
                if index[wu] == UNSEEN {
                    index[wu] = next_index;
                    low[wu] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[wu] = true;
                    call.push((w, 0));
                } else if on_stack[wu] {
                    low[vu] = low[vu].min(index[wu]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                let pu = parent as usize;
                low[pu] = low[pu].min(low[vu]);
            }
            if low[vu] == index[vu] {
                loop {
                    let w = stack.pop().expect("v is on the stack");
                    on_stack[w as usize] = false;
                    raw[w as usize] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }

    let mut relabel = vec![UNSEEN; next_comp as usize];
    let mut fresh = 0u32;
    raw.iter()
        .map(|&c| {
            let slot = &mut relabel[c as usize];
            if *slot == UNSEEN {
                *slot = fresh;
                fresh += 1;
            }
            *slot
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_graphs() {
        assert!(tarjan_scc(&[]).is_empty());
        assert_eq!(tarjan_scc(&[vec![]]), vec![0]);
        // 0 → 1 → 2 → 0, 2 → 3, 3 → 4 → 3
        let g = vec![vec![1], vec![2], vec![0, 3], vec![4], vec![3]];
        assert_eq!(tarjan_scc(&g), vec![0, 0, 0, 1, 1]);
        // a chain has singleton components
        let g = vec![vec![1], vec![2], vec![]];
        assert_eq!(tarjan_scc(&g), vec![0, 1, 2]);
    }

    #[test]
    fn deep_cycle_does_not_overflow() {
        let n = 200_000u32;
        let g: Vec<Vec<u32>> = (0..n).map(|i| vec![(i + 1) % n]).collect();
        assert!(tarjan_scc(&g).iter().all(|&c| c == 0));
    }
}
