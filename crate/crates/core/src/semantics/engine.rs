//! Heap-driven merge engine shared by both semantics.
//!
//! Tokens live in a doubly-linked list indexed by the offset of their first
//! symbol, so ordering heap entries by `(rule, node)` picks the highest
//! priority rule and, for that rule, the leftmost occurrence. Stale entries
//! are skipped through per-node generation counters.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::model::{Dictionary, Symbol, TokenId};

use super::DerivationStep;

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    /// Re-pick the best rule after every merge.
    Sp,
    /// Exhaust the picked rule left to right before re-picking.
    Hf,
}

/// Optional recording of derivation steps and phase boundaries.
#[derive(Default)]
pub(crate) struct Recorder {
    pub steps: Vec<DerivationStep>,
    pub phase_starts: Vec<usize>,
}

/// Fenwick tree over live nodes; turns a node index into a token position.
struct LiveCounter {
    tree: Vec<i32>,
}

impl LiveCounter {
    fn new(n: usize) -> Self {
        let mut tree = vec![0i32; n + 1];
        for i in 1..=n {
            tree[i] += 1;
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i];
            }
        }
        Self { tree }
    }

    fn remove(&mut self, node: usize) {
        let mut i = node + 1;
        while i < self.tree.len() {
            self.tree[i] -= 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Live nodes strictly before `node`.
    fn before(&self, node: usize) -> usize {
        let mut i = node;
        let mut sum = 0;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum as usize
    }
}

type Entry = Reverse<(u32, u32, u32)>;

/// Reusable working buffers.
#[derive(Default)]
pub(crate) struct Engine {
    ids: Vec<TokenId>,
    lens: Vec<u32>,
    next: Vec<u32>,
    prev: Vec<u32>,
    generation: Vec<u32>,
    heap: BinaryHeap<Entry>,
    batch: Vec<(u32, u32)>,
}

impl Engine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Tokenizes `w`, appending token lengths to `out`.
    pub fn run<S: Symbol>(
        &mut self,
        dict: &Dictionary<S>,
        w: &[S],
        mode: Mode,
        mut recorder: Option<&mut Recorder>,
        out: &mut Vec<usize>,
    ) {
        let n = w.len();
        if n == 0 {
            return;
        }
        assert!(n < NIL as usize, "input too long for the merge engine");
        self.ids.clear();
        self.ids.extend(w.iter().map(|&s| dict.symbol_id(s)));
        self.lens.clear();
        self.lens.resize(n, 1);
        self.next.clear();
        self.next.extend(1..=n as u32);
        self.next[n - 1] = NIL;
        self.prev.clear();
        self.prev.push(NIL);
        self.prev.extend(0..n as u32 - 1);
        self.generation.clear();
        self.generation.resize(n, 0);
        let mut initial = std::mem::take(&mut self.heap).into_vec();
        initial.clear();
        initial.extend((0..n - 1).filter_map(|i| {
            dict.merge(self.ids[i], self.ids[i + 1])
                .map(|m| Reverse((m.rule, i as u32, 0)))
        }));
        self.heap = BinaryHeap::from(initial);

        let mut live = recorder.as_ref().map(|_| LiveCounter::new(n));
        let mut live_count = n;

        match mode {
            Mode::Sp => {
                while let Some(Reverse((rule, node, generation))) = self.heap.pop() {
                    if self.is_current(node, generation) {
                        self.record(&mut recorder, live.as_mut(), &mut live_count, rule, node);
                        self.merge_at(dict, node);
                    }
                }
            }
            Mode::Hf => {
                while let Some(&Reverse((rule, _, _))) = self.heap.peek() {
                    self.batch.clear();
                    while let Some(&Reverse((r, node, generation))) = self.heap.peek() {
                        if r != rule {
                            break;
                        }
                        self.heap.pop();
                        self.batch.push((node, generation));
                    }
                    // A merge with `u | v` yields `uv`, which can be neither `u`
                    // nor `v`, so a single left-to-right sweep exhausts the rule.
                    let mut phase_open = false;
                    for k in 0..self.batch.len() {
                        let (node, generation) = self.batch[k];
                        if !self.is_current(node, generation) {
                            continue;
                        }
                        if !phase_open {
                            phase_open = true;
                            if let Some(rec) = recorder.as_deref_mut() {
                                rec.phase_starts.push(rec.steps.len());
                            }
                        }
                        self.record(&mut recorder, live.as_mut(), &mut live_count, rule, node);
                        self.merge_at(dict, node);
                    }
                }
            }
        }

        let mut node = 0u32;
        while node != NIL {
            out.push(self.lens[node as usize] as usize);
            node = self.next[node as usize];
        }
    }

    #[inline]
    fn is_current(&self, node: u32, generation: u32) -> bool {
        let i = node as usize;
        self.lens[i] != 0 && self.generation[i] == generation && self.next[i] != NIL
    }

    fn record(
        &self,
        recorder: &mut Option<&mut Recorder>,
        live: Option<&mut LiveCounter>,
        live_count: &mut usize,
        rule: u32,
        node: u32,
    ) {
        if let (Some(rec), Some(live)) = (recorder.as_deref_mut(), live) {
            rec.steps.push(DerivationStep {
                rule_index: rule as usize,
                position: live.before(node as usize),
                before_length: *live_count,
            });
            live.remove(self.next[node as usize] as usize);
            *live_count -= 1;
        }
    }

    fn merge_at<S: Symbol>(&mut self, dict: &Dictionary<S>, node: u32) {
        let i = node as usize;
        let j = self.next[i] as usize;
        let merge = dict
            .merge(self.ids[i], self.ids[j])
            .expect("current heap entry names a rule");
        self.ids[i] = merge.product;
        self.lens[i] += self.lens[j];
        self.lens[j] = 0;
        let k = self.next[j];
        self.next[i] = k;
        if k != NIL {
            self.prev[k as usize] = node;
        }
        self.generation[i] = self.generation[i].wrapping_add(1);

        let p = self.prev[i];
        if p != NIL {
            let p = p as usize;
            self.generation[p] = self.generation[p].wrapping_add(1);
            if let Some(m) = dict.merge(self.ids[p], self.ids[i]) {
                self.heap
                    .push(Reverse((m.rule, p as u32, self.generation[p])));
            }
        }
        if k != NIL {
            if let Some(m) = dict.merge(self.ids[i], self.ids[k as usize]) {
                self.heap.push(Reverse((m.rule, node, self.generation[i])));
            }
        }
    }
}
