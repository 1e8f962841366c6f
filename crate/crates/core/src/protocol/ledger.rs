use std::collections::{BTreeMap, BTreeSet};

use super::{NodeId, ProtocolError, SlotIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Send,
    Receive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reservation {
    pub peer: NodeId,
    pub direction: Direction,
}

/// One node's view of the data slots for the current frame.
///
/// Reservations never outlive their frame: [`SlotLedger::reset`] runs at
/// every frame boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotLedger {
    pub mine: BTreeMap<SlotIndex, Reservation>,
    /// Slots announced by neighbours (overheard ATIM_ACK / ATIM_RES).
    pub neighborhood_busy: BTreeSet<SlotIndex>,
    pub epoch: u64,
    capacity: SlotIndex,
}

impl SlotLedger {
    pub fn new(capacity: SlotIndex) -> Self {
        SlotLedger {
            mine: BTreeMap::new(),
            neighborhood_busy: BTreeSet::new(),
            epoch: 0,
            capacity,
        }
    }

    pub fn capacity(&self) -> SlotIndex {
        self.capacity
    }

    pub fn reset(&mut self, epoch: u64) {
        self.mine.clear();
        self.neighborhood_busy.clear();
        self.epoch = epoch;
    }

    pub fn is_free(&self, slot: SlotIndex) -> bool {
        slot < self.capacity && !self.mine.contains_key(&slot) && !self.neighborhood_busy.contains(&slot)
    }

    /// Free slots in ascending order.
    pub fn free_slots(&self) -> impl Iterator<Item = SlotIndex> + '_ {
        (0..self.capacity).filter(|&s| self.is_free(s))
    }

    pub fn mark_busy(&mut self, slots: &[SlotIndex]) {
        self.neighborhood_busy
            .extend(slots.iter().copied().filter(|&s| s < self.capacity));
    }

    pub fn commit(&mut self, slot: SlotIndex, reservation: Reservation) -> Result<(), ProtocolError> {
        if slot >= self.capacity {
            return Err(ProtocolError::SlotOutOfRange {
                slot,
                data_slots: self.capacity,
            });
        }
        if self.mine.contains_key(&slot) {
            return Err(ProtocolError::SlotTaken(slot));
        }
        self.mine.insert(slot, reservation);
        Ok(())
    }

    pub fn reservation(&self, slot: SlotIndex) -> Option<Reservation> {
        self.mine.get(&slot).copied()
    }

    /// Slots this node sends in, for `peer`.
    pub fn send_slots_to(&self, peer: NodeId) -> impl Iterator<Item = SlotIndex> + '_ {
        self.mine
            .iter()
            .filter(move |(_, r)| r.peer == peer && r.direction == Direction::Send)
            .map(|(&s, _)| s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_set_excludes_mine_and_busy() {
        let mut l = SlotLedger::new(6);
        l.mark_busy(&[1, 4, 9]);
        l.commit(
            2,
            Reservation {
                peer: NodeId(3),
                direction: Direction::Send,
            },
        )
        .unwrap();
        assert_eq!(l.free_slots().collect::<Vec<_>>(), vec![0, 3, 5]);
        assert_eq!(l.send_slots_to(NodeId(3)).collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn a_slot_is_committed_once() {
        let mut l = SlotLedger::new(4);
        let r = Reservation {
            peer: NodeId(1),
            direction: Direction::Receive,
        };
        l.commit(0, r).unwrap();
        assert_eq!(l.commit(0, r), Err(ProtocolError::SlotTaken(0)));
        assert!(l.commit(4, r).is_err());
    }

    #[test]
    fn reset_clears_everything() {
        let mut l = SlotLedger::new(4);
        l.mark_busy(&[0]);
        l.commit(
            1,
            Reservation {
                peer: NodeId(1),
                direction: Direction::Send,
            },
        )
        .unwrap();
        l.reset(7);
        assert!(l.mine.is_empty());
        assert!(l.neighborhood_busy.is_empty());
        assert_eq!(l.epoch, 7);
    }
}
