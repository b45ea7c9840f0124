use std::cmp::Ordering;

/// Kinds of scheduled events. At equal times coarser events are handled
/// first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventType {
    Hour = 1,
    Week = 2,
    Quarter = 3,
    Year = 4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Event {
    /// Hour clock from the start of the simulation.
    pub time: u64,
    pub event_type: EventType,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.cmp(&other.time).then((other.event_type as u8).cmp(&(self.event_type as u8)))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Time-ordered event array with a cursor on the earliest unhandled event.
#[derive(Clone, Debug, PartialEq)]
pub struct EventList {
    entries: Vec<Event>,
    current_list_pos: usize,
    current_clock: u64,
}

impl EventList {
    /// List holding the year, quarter, week and hour anchors at `start`.
    pub fn new(start: u64) -> Self {
        let entries = [EventType::Year, EventType::Quarter, EventType::Week, EventType::Hour]
            .map(|event_type| Event { time: start, event_type })
            .to_vec();
        EventList { entries, current_list_pos: 0, current_clock: start }
    }

    pub fn clock(&self) -> u64 {
        self.current_clock
    }

    pub fn set_clock(&mut self, t: u64) {
        self.current_clock = t;
    }

    /// Unhandled events in order.
    pub fn pending(&self) -> &[Event] {
        &self.entries[self.current_list_pos.min(self.entries.len())..]
    }

    /// Earliest unhandled event, advancing the cursor past it.
    pub fn fetch(&mut self) -> Option<Event> {
        let ev = *self.entries.get(self.current_list_pos)?;
        self.current_list_pos += 1;
        if self.current_list_pos >= 64 {
            self.entries.drain(..self.current_list_pos);
            self.current_list_pos = 0;
        }
        Some(ev)
    }

    /// Insert keeping the unhandled part sorted.
    pub fn insert(&mut self, ev: Event) {
        let tail = &self.entries[self.current_list_pos..];
        let at = self.current_list_pos + tail.partition_point(|e| *e <= ev);
        self.entries.insert(at, ev);
    }

    /// Corrupt the list for testing the engine's guards.
    #[doc(hidden)]
    pub fn entries_mut(&mut self) -> &mut Vec<Event> {
        &mut self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors_in_tie_order() {
        let list = EventList::new(0);
        let kinds: Vec<_> = list.pending().iter().map(|e| e.event_type).collect();
        assert_eq!(kinds, [EventType::Year, EventType::Quarter, EventType::Week, EventType::Hour]);
        assert!(list.pending().iter().all(|e| e.time == 0));
    }

    #[test]
    fn insert_keeps_order() {
        let mut list = EventList::new(0);
        for _ in 0..4 {
            list.fetch();
        }
        list.insert(Event { time: 1, event_type: EventType::Hour });
        list.insert(Event { time: 168, event_type: EventType::Hour });
        list.insert(Event { time: 168, event_type: EventType::Week });
        list.insert(Event { time: 168, event_type: EventType::Year });
        let got: Vec<_> = list.pending().iter().map(|e| (e.time, e.event_type)).collect();
        assert_eq!(
            got,
            [(1, EventType::Hour), (168, EventType::Year), (168, EventType::Week), (168, EventType::Hour)]
        );
        assert_eq!(list.fetch().unwrap().time, 1);
    }

    #[test]
    fn long_runs_stay_short() {
        let mut list = EventList::new(0);
        for t in 1..10_000 {
            list.fetch();
            list.insert(Event { time: t, event_type: EventType::Hour });
        }
        assert!(list.entries.len() < 70);
    }
}
