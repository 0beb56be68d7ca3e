//! Static schedule: T contiguous index ranges of near-equal size, each owned
//! by one worker. Workers write only their own slice; the end of the thread
//! scope is the barrier between phases.

use std::ops::Range;

/// Splits `0..n` into `parts` contiguous ranges whose sizes differ by at most
/// one; the first `n % parts` ranges get the extra element.
pub fn partition(n: usize, parts: usize) -> Vec<Range<usize>> {
    assert!(parts > 0, "partition needs at least one part");
    let base = n / parts;
    let extra = n % parts;
    let mut start = 0;
    (0..parts)
        .map(|p| {
            let len = base + usize::from(p < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Cuts `slice` into disjoint pieces matching consecutive `ranges`.
pub(crate) fn split_by<'a, T>(mut slice: &'a mut [T], ranges: &[Range<usize>]) -> Vec<&'a mut [T]> {
    let mut pieces = Vec::with_capacity(ranges.len());
    for r in ranges {
        let (head, tail) = slice.split_at_mut(r.len());
        pieces.push(head);
        slice = tail;
    }
    pieces
}

/// Runs `work` on every item, one worker per item, and returns once all are
/// done. The last item runs on the calling thread.
pub(crate) fn run_static<W, F>(mut items: Vec<W>, work: F)
where
    W: Send,
    F: Fn(W) + Sync,
{
    let Some(last) = items.pop() else { return };
    if items.is_empty() {
        work(last);
        return;
    }
    std::thread::scope(|s| {
        let work = &work;
        for item in items {
            s.spawn(move || work(item));
        }
        work(last);
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_without_overlap() {
        for n in 0..40 {
            for parts in 1..9 {
                let ranges = partition(n, parts);
                assert_eq!(ranges.len(), parts);
                assert_eq!(ranges[0].start, 0);
                assert_eq!(ranges.last().unwrap().end, n);
                for w in ranges.windows(2) {
                    assert_eq!(w[0].end, w[1].start);
                }
                let max = ranges.iter().map(|r| r.len()).max().unwrap();
                let min = ranges.iter().map(|r| r.len()).min().unwrap();
                assert!(max - min <= 1);
            }
        }
    }

    #[test]
    fn ten_over_four() {
        assert_eq!(partition(10, 4), vec![0..3, 3..6, 6..8, 8..10]);
    }

    #[test]
    fn workers_write_own_slice() {
        let mut data = vec![0usize; 17];
        let ranges = partition(17, 4);
        let pieces = split_by(&mut data, &ranges);
        let items: Vec<_> = ranges.into_iter().zip(pieces).collect();
        run_static(items, |(r, piece)| {
            for (k, v) in piece.iter_mut().enumerate() {
                *v = r.start + k;
            }
        });
        assert_eq!(data, (0..17).collect::<Vec<_>>());
    }
}
