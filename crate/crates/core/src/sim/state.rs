//! Page-mapped FTL state machine.
//!
//! Every physical page slot follows the write-once lifecycle
//! `free -> valid -> invalid -> ... -> (erase) -> free`, where a slot may be
//! programmed again while invalid only if its block has moved to a later write
//! stage and the slot has been programmed fewer than `t` times since the last
//! erase. All slot transitions go through [`FtlState::program_slot`],
//! [`FtlState::invalidate`] and [`FtlState::erase`], which enforce the law and
//! return [`Error::Constraint`] on any violation.

use std::collections::VecDeque;

use crate::error::{Error, Result};

use super::histogram::ValidityHistogram;

const FREE: u32 = u32::MAX;
const INVALID: u32 = u32::MAX - 1;
const UNMAPPED: u32 = u32::MAX;

/// Block stage 0 means clean (in the free queue).
const CLEAN: u8 = 0;

/// Which garbage-collection rule the FTL runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GcPolicy {
    /// Erase the block with the fewest valid pages.
    Greedy,
    /// Single greedy pool; a victim below the last stage moves to its next
    /// write instead of being erased.
    GreedyRewrite,
    /// Move the least-valid first-write block to its second write when it has
    /// at most `threshold_pages` valid pages, otherwise erase the least-valid
    /// second-write block.
    Threshold { threshold_pages: f64 },
}

/// Static shape of the simulated device.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub blocks: u32,
    pub slots_per_block: u32,
    pub logical_pages: u32,
    /// Slots one logical page consumes on each write stage (length `t`).
    pub slot_span: Vec<u32>,
}

impl Layout {
    pub fn stages(&self) -> u8 {
        self.slot_span.len() as u8
    }
}

#[derive(Debug, Clone, Copy)]
struct Block {
    stage: u8,
    valid: u32,
}

#[derive(Debug, Clone, Copy)]
struct Location {
    block: u32,
    slots: [u32; 2],
    span: u8,
}

impl Location {
    const NONE: Location = Location {
        block: UNMAPPED,
        slots: [0, 0],
        span: 0,
    };

    fn slots(&self) -> &[u32] {
        &self.slots[..self.span as usize]
    }
}

#[derive(Debug, Clone)]
enum Cursor {
    Sequential { next: u32 },
    Reuse { slots: Vec<u32> },
}

#[derive(Debug, Clone)]
struct Active {
    block: u32,
    cursor: Cursor,
}

/// Logical writes `L`, physical page programs `P`, erasures `E`, and GC copies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub logical: u64,
    pub physical: u64,
    pub erasures: u64,
    pub copies: u64,
    /// Sum over erasures of the victim's valid pages at erase time.
    pub valid_at_erase: u64,
    /// Moves of a block to a later write stage.
    pub promotions: u64,
}

#[derive(Debug, Clone)]
pub struct FtlState {
    layout: Layout,
    policy: GcPolicy,
    content: Vec<u32>,
    programs: Vec<u8>,
    blocks: Vec<Block>,
    map: Vec<Location>,
    free_queue: VecDeque<u32>,
    active: Option<Active>,
    counters: Counters,
    mapped: u32,
    scratch: Vec<u32>,
}

impl FtlState {
    pub fn new(layout: Layout, policy: GcPolicy) -> Result<Self> {
        if layout.blocks < 2 || layout.slots_per_block == 0 {
            return Err(Error::Config("need at least two blocks with one slot each".into()));
        }
        if layout.slot_span.is_empty() || layout.slot_span.iter().any(|&s| s == 0 || s > 2) {
            return Err(Error::Config(format!("unsupported slot spans {:?}", layout.slot_span)));
        }
        if layout.slot_span[0] != 1 {
            return Err(Error::Config("first-write pages must occupy one slot".into()));
        }
        let total = u64::from(layout.blocks) * u64::from(layout.slots_per_block);
        if u64::from(layout.logical_pages) == 0 || u64::from(layout.logical_pages) >= total {
            return Err(Error::Config(format!(
                "need 0 < logical pages ({}) < physical slots ({total})",
                layout.logical_pages
            )));
        }
        if matches!(policy, GcPolicy::Threshold { .. }) && layout.stages() != 2 {
            return Err(Error::Config("threshold GC needs exactly two write stages".into()));
        }
        Ok(Self {
            content: vec![FREE; total as usize],
            programs: vec![0; total as usize],
            blocks: vec![Block { stage: CLEAN, valid: 0 }; layout.blocks as usize],
            map: vec![Location::NONE; layout.logical_pages as usize],
            free_queue: (0..layout.blocks).collect(),
            active: None,
            counters: Counters::default(),
            mapped: 0,
            scratch: Vec::new(),
            layout,
            policy,
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn reset_counters(&mut self) {
        self.counters = Counters::default();
    }

    /// Distinct logical pages written so far.
    pub fn mapped_pages(&self) -> u32 {
        self.mapped
    }

    pub fn free_blocks(&self) -> usize {
        self.free_queue.len()
    }

    pub fn total_valid(&self) -> u64 {
        self.blocks.iter().map(|b| u64::from(b.valid)).sum()
    }

    pub fn block_valid(&self, block: u32) -> u32 {
        self.blocks[block as usize].valid
    }

    pub fn block_stage(&self, block: u32) -> u8 {
        self.blocks[block as usize].stage
    }

    /// Block currently receiving writes, if any.
    pub fn active_block(&self) -> Option<u32> {
        self.active.as_ref().map(|a| a.block)
    }

    /// Block holding `logical`, if it has been written.
    pub fn location_of(&self, logical: u32) -> Option<u32> {
        self.map.get(logical as usize).and_then(|l| (l.block != UNMAPPED).then_some(l.block))
    }

    /// Writes logical page `logical` out of place, collecting garbage if no
    /// writable slot remains.
    pub fn step_write(&mut self, logical: u32) -> Result<()> {
        if logical >= self.layout.logical_pages {
            return Err(Error::Domain(format!(
                "logical page {logical} out of range [0, {})",
                self.layout.logical_pages
            )));
        }
        self.invalidate(logical)?;
        self.ensure_room()?;
        self.place(logical)?;
        self.counters.logical += 1;
        Ok(())
    }

    /// Counts of blocks per (stage, valid pages); clean blocks are counted separately.
    pub fn snapshot_histogram(&self) -> ValidityHistogram {
        let mut hist = ValidityHistogram::new(self.layout.stages() as usize, self.layout.slots_per_block as usize);
        for b in &self.blocks {
            if b.stage != CLEAN {
                hist.add(b.stage as usize, b.valid as usize);
            }
        }
        hist.set_free(self.free_queue.len() as u64);
        hist
    }

    fn slot_index(&self, block: u32, slot: u32) -> usize {
        block as usize * self.layout.slots_per_block as usize + slot as usize
    }

    fn invalidate(&mut self, logical: u32) -> Result<()> {
        let loc = self.map[logical as usize];
        if loc.block == UNMAPPED {
            self.mapped += 1;
            return Ok(());
        }
        for &slot in loc.slots() {
            let idx = self.slot_index(loc.block, slot);
            if self.content[idx] != logical {
                return Err(Error::Constraint(format!(
                    "slot {slot} of block {} does not hold logical page {logical}",
                    loc.block
                )));
            }
            self.content[idx] = INVALID;
        }
        self.blocks[loc.block as usize].valid -= 1;
        self.map[logical as usize] = Location::NONE;
        Ok(())
    }

    fn active_has_room(&self) -> bool {
        let Some(active) = &self.active else {
            return false;
        };
        let stage = self.blocks[active.block as usize].stage;
        let span = self.layout.slot_span[stage as usize - 1];
        match &active.cursor {
            Cursor::Sequential { next } => next + span <= self.layout.slots_per_block,
            Cursor::Reuse { slots } => slots.len() >= span as usize,
        }
    }

    fn ensure_room(&mut self) -> Result<()> {
        loop {
            if self.active_has_room() {
                return Ok(());
            }
            self.active = None;
            if let Some(block) = self.free_queue.pop_front() {
                self.blocks[block as usize].stage = 1;
                self.active = Some(Active {
                    block,
                    cursor: Cursor::Sequential { next: 0 },
                });
                continue;
            }
            self.collect_garbage()?;
        }
    }

    fn program_slot(&mut self, block: u32, slot: u32, logical: u32) -> Result<()> {
        let idx = self.slot_index(block, slot);
        let stage = self.blocks[block as usize].stage;
        let ok = match self.content[idx] {
            FREE => self.programs[idx] == 0,
            INVALID => stage >= 2 && self.programs[idx] < stage,
            _ => false,
        };
        if !ok {
            return Err(Error::Constraint(format!(
                "cannot program slot {slot} of block {block} (stage {stage}, programmed {} times, content {:#x})",
                self.programs[idx], self.content[idx]
            )));
        }
        self.content[idx] = logical;
        self.programs[idx] += 1;
        self.counters.physical += 1;
        Ok(())
    }

    fn place(&mut self, logical: u32) -> Result<()> {
        let mut active = self.active.take().expect("ensure_room leaves an active block");
        let block = active.block;
        let stage = self.blocks[block as usize].stage;
        let span = self.layout.slot_span[stage as usize - 1];
        let mut loc = Location {
            block,
            slots: [0, 0],
            span: span as u8,
        };
        for k in 0..span as usize {
            loc.slots[k] = match &mut active.cursor {
                Cursor::Sequential { next } => {
                    *next += 1;
                    *next - 1
                }
                Cursor::Reuse { slots } => slots.pop().expect("room was checked"),
            };
        }
        self.active = Some(active);
        for &slot in loc.slots() {
            self.program_slot(block, slot, logical)?;
        }
        self.blocks[block as usize].valid += 1;
        self.map[logical as usize] = loc;
        Ok(())
    }

    /// Least-valid block satisfying `pred`, lowest id on ties.
    fn min_valid(&self, pred: impl Fn(u32, &Block) -> bool) -> Option<u32> {
        let mut best: Option<(u32, u32)> = None;
        for (id, b) in self.blocks.iter().enumerate() {
            let id = id as u32;
            if b.stage == CLEAN || !pred(id, b) {
                continue;
            }
            if best.is_none_or(|(_, v)| b.valid < v) {
                best = Some((id, b.valid));
            }
        }
        best.map(|(id, _)| id)
    }

    fn collect_garbage(&mut self) -> Result<()> {
        let stages = self.layout.stages();
        match self.policy {
            GcPolicy::Greedy => {
                let victim = self
                    .min_valid(|_, _| true)
                    .ok_or_else(|| Error::Deadlock("no block to collect".into()))?;
                self.erase(victim)
            }
            GcPolicy::GreedyRewrite => {
                let victim = self
                    .min_valid(|_, _| true)
                    .ok_or_else(|| Error::Deadlock("no block to collect".into()))?;
                if self.blocks[victim as usize].stage < stages {
                    self.promote(victim)
                } else {
                    self.erase(victim)
                }
            }
            GcPolicy::Threshold { threshold_pages } => {
                let z = self.layout.slots_per_block;
                let span = self.layout.slot_span[1];
                let first = self.min_valid(|_, b| b.stage == 1 && z - b.valid >= span);
                let second = self.min_valid(|_, b| b.stage == 2);
                match (first, second) {
                    (Some(b1), _) if f64::from(self.blocks[b1 as usize].valid) <= threshold_pages => self.promote(b1),
                    (_, Some(b2)) => self.erase(b2),
                    // Only reachable before any block has reached its second write.
                    (Some(b1), None) => self.promote(b1),
                    (None, None) => Err(Error::Deadlock(
                        "no first-write block with room for a second write and no second-write block to erase"
                            .into(),
                    )),
                }
            }
        }
    }

    /// Moves `block` to its next write stage; its invalid slots become writable.
    fn promote(&mut self, block: u32) -> Result<()> {
        let next_stage = self.blocks[block as usize].stage + 1;
        if next_stage > self.layout.stages() {
            return Err(Error::Constraint(format!("block {block} is already on its last write")));
        }
        let base = self.slot_index(block, 0);
        let n = self.layout.slots_per_block as usize;
        let mut slots: Vec<u32> = (0..n)
            .filter(|&s| self.content[base + s] == INVALID && self.programs[base + s] < next_stage)
            .map(|s| s as u32)
            .collect();
        // Pop from the back, so reverse to fill low slots first.
        slots.reverse();
        self.blocks[block as usize].stage = next_stage;
        self.counters.promotions += 1;
        self.active = Some(Active {
            block,
            cursor: Cursor::Reuse { slots },
        });
        Ok(())
    }

    /// Physically erases `block` and copies its valid pages back into it as
    /// first-write pages.
    fn erase(&mut self, block: u32) -> Result<()> {
        let base = self.slot_index(block, 0);
        let n = self.layout.slots_per_block as usize;
        let mut survivors = std::mem::take(&mut self.scratch);
        survivors.clear();
        for s in 0..n {
            let c = self.content[base + s];
            if c != FREE && c != INVALID && self.map[c as usize].block == block && self.map[c as usize].slots[0] == s as u32 {
                survivors.push(c);
            }
        }
        if survivors.len() as u32 != self.blocks[block as usize].valid {
            return Err(Error::Constraint(format!(
                "block {block} reports {} valid pages but holds {}",
                self.blocks[block as usize].valid,
                survivors.len()
            )));
        }
        self.content[base..base + n].fill(FREE);
        self.programs[base..base + n].fill(0);
        self.counters.erasures += 1;
        self.counters.valid_at_erase += survivors.len() as u64;
        self.blocks[block as usize] = Block { stage: 1, valid: 0 };
        self.active = Some(Active {
            block,
            cursor: Cursor::Sequential { next: 0 },
        });
        for &logical in &survivors {
            self.map[logical as usize] = Location::NONE;
            self.place(logical)?;
            self.counters.copies += 1;
        }
        self.scratch = survivors;
        Ok(())
    }

    /// Recomputes every derived quantity from the slot array and checks it
    /// against the incremental bookkeeping.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.layout.slots_per_block as usize;
        let mut valid = vec![0u32; self.blocks.len()];
        let mut seen = 0u32;
        for (logical, loc) in self.map.iter().enumerate() {
            if loc.block == UNMAPPED {
                continue;
            }
            seen += 1;
            let stage = self.blocks[loc.block as usize].stage;
            if stage == CLEAN {
                return Err(Error::Constraint(format!("logical {logical} maps into clean block {}", loc.block)));
            }
            for &s in loc.slots() {
                if self.content[self.slot_index(loc.block, s)] != logical as u32 {
                    return Err(Error::Constraint(format!("map entry of {logical} points at a foreign slot")));
                }
            }
            valid[loc.block as usize] += 1;
        }
        if seen != self.mapped {
            return Err(Error::Constraint(format!("{seen} mapped pages, expected {}", self.mapped)));
        }
        let mut held = 0usize;
        for (id, b) in self.blocks.iter().enumerate() {
            if b.valid != valid[id] {
                return Err(Error::Constraint(format!(
                    "block {id} counts {} valid pages, slots hold {}",
                    b.valid, valid[id]
                )));
            }
            let slots = &self.content[id * n..(id + 1) * n];
            let progs = &self.programs[id * n..(id + 1) * n];
            for (c, &p) in slots.iter().zip(progs) {
                let legal = match *c {
                    FREE => p == 0,
                    _ => p >= 1 && p <= b.stage.max(1),
                };
                if !legal {
                    return Err(Error::Constraint(format!("block {id} slot programmed {p} times at stage {}", b.stage)));
                }
            }
            if b.stage == CLEAN && slots.iter().any(|&c| c != FREE) {
                return Err(Error::Constraint(format!("clean block {id} has programmed slots")));
            }
            held += slots.iter().filter(|&&c| c != FREE && c != INVALID).count();
        }
        let expected: usize = self
            .map
            .iter()
            .filter(|l| l.block != UNMAPPED)
            .map(|l| l.span as usize)
            .sum();
        if held != expected {
            return Err(Error::Constraint(format!("{held} slots hold data, map accounts for {expected}")));
        }
        let hist = self.snapshot_histogram();
        if hist.total_blocks() != u64::from(self.layout.blocks) {
            return Err(Error::Constraint("histogram does not partition the blocks".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline(blocks: u32, z: u32, logical: u32) -> FtlState {
        FtlState::new(
            Layout {
                blocks,
                slots_per_block: z,
                logical_pages: logical,
                slot_span: vec![1],
            },
            GcPolicy::Greedy,
        )
        .unwrap()
    }

    #[test]
    fn first_write_counts() {
        let mut s = baseline(4, 8, 16);
        s.step_write(3).unwrap();
        let c = s.counters();
        assert_eq!((c.logical, c.physical, c.erasures), (1, 1, 0));
        assert_eq!(s.block_valid(s.active_block().unwrap()), 1);
        s.check_invariants().unwrap();
    }

    #[test]
    fn overwrite_conserves_valid_pages() {
        let mut s = baseline(4, 8, 16);
        s.step_write(3).unwrap();
        s.step_write(3).unwrap();
        assert_eq!(s.total_valid(), 1);
        assert_eq!(s.mapped_pages(), 1);
        assert_eq!(s.counters().physical, 2);
        s.check_invariants().unwrap();
    }

    #[test]
    fn sequential_fill_needs_no_erase() {
        let mut s = baseline(8, 16, 7 * 16);
        for l in 0..7 * 16 {
            s.step_write(l).unwrap();
        }
        assert_eq!(s.counters().erasures, 0);
        assert_eq!(s.total_valid(), 7 * 16);
    }

    #[test]
    fn greedy_erases_least_valid_lowest_id() {
        let mut s = baseline(3, 4, 4);
        // Fill blocks 0 and 1 with pages 0..4 twice, then one more write triggers GC.
        for l in 0..4 {
            s.step_write(l).unwrap();
        }
        for l in 0..4 {
            s.step_write(l).unwrap();
        }
        for l in 0..4 {
            s.step_write(l).unwrap();
        }
        // Blocks 0 and 1 both have zero valid; block 0 is erased first.
        s.step_write(0).unwrap();
        assert_eq!(s.counters().erasures, 1);
        assert_eq!(s.active_block(), Some(0));
        assert_eq!(s.counters().copies, 0);
        s.check_invariants().unwrap();
    }

    #[test]
    fn out_of_range_page_is_rejected() {
        let mut s = baseline(4, 8, 16);
        assert!(s.step_write(16).is_err());
    }

    #[test]
    fn second_write_reuses_invalid_slots() {
        let mut s = FtlState::new(
            Layout {
                blocks: 3,
                slots_per_block: 4,
                logical_pages: 4,
                slot_span: vec![1, 2],
            },
            GcPolicy::Threshold { threshold_pages: 4.0 },
        )
        .unwrap();
        for _ in 0..3 {
            for l in 0..4 {
                s.step_write(l).unwrap();
            }
        }
        // All three blocks full; block 0 has 0 valid and moves to second write.
        s.step_write(0).unwrap();
        assert_eq!(s.counters().erasures, 0);
        assert_eq!(s.block_stage(0), 2);
        assert_eq!(s.counters().physical, 12 + 2);
        s.check_invariants().unwrap();
        s.step_write(1).unwrap();
        // Block 0 had four invalid slots: two second-write pages fit.
        assert_eq!(s.block_valid(0), 2);
        s.check_invariants().unwrap();
    }
}
