use serde::Serialize;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RoundEntry {
    pub round: usize,
    pub label: String,
    pub space: usize,
}

/// Counts adaptive sketching rounds and the largest simultaneous central storage.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RoundLedger {
    pub rounds: usize,
    pub peak_space: usize,
    pub log: Vec<RoundEntry>,
}

impl RoundLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn begin_round(&mut self, label: &str) {
        self.rounds += 1;
        self.log.push(RoundEntry { round: self.rounds, label: label.to_string(), space: 0 });
    }

    pub fn record_space(&mut self, items: usize) {
        self.peak_space = self.peak_space.max(items);
        if let Some(last) = self.log.last_mut() {
            last.space = last.space.max(items);
        }
    }
}
