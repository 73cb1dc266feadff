//! Nearest-idle relay choice among primary users.

use cogrelay::channels::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PuEntry {
    pub position: Point,
    pub idle: bool,
    /// Arrival order used for contention; carried through, not ranked on.
    pub priority: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeInventory {
    su_position: Point,
    pu_entries: Vec<PuEntry>,
}

impl NodeInventory {
    pub fn new(su_position: Point, pu_entries: Vec<PuEntry>) -> Result<Self, String> {
        let finite = |p: Point| p.x.is_finite() && p.y.is_finite();
        if !finite(su_position) {
            return Err("SU position must be finite".into());
        }
        if let Some(i) = pu_entries.iter().position(|e| !finite(e.position)) {
            return Err(format!("PU {i} position must be finite"));
        }
        Ok(Self { su_position, pu_entries })
    }

    pub fn su_position(&self) -> Point {
        self.su_position
    }

    pub fn pu_entries(&self) -> &[PuEntry] {
        &self.pu_entries
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaySelection {
    /// Index into the inventory's PU list.
    Relay(usize),
    /// No idle PU: the SU holds its transmission.
    Suspend,
}

/// Nearest idle PU to the SU; equal distances go to the lower index.
pub fn select_relay(inv: &NodeInventory) -> RelaySelection {
    let su = inv.su_position;
    inv.pu_entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.idle)
        .map(|(i, e)| (i, e.position.distance(su)))
        .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((i, d)),
        })
        .map_or(RelaySelection::Suspend, |(i, _)| RelaySelection::Relay(i))
}
