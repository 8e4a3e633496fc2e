use super::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Settling {
    /// Time after which the components stay within the band, s.
    Settled(f64),
    NotSettled,
}

impl Settling {
    pub fn seconds(self) -> Option<f64> {
        match self {
            Settling::Settled(t) => Some(t),
            Settling::NotSettled => None,
        }
    }
}

/// For each group of state indices, the first sample time after which every
/// listed component stays within `threshold` (relative) of its final value.
///
/// `groups` holds `(x indices, y indices)` per group, typically one group
/// per cell. A group whose only sample inside the band is the final one
/// has not settled.
pub fn settling_time(traj: &Trajectory, groups: &[(Vec<usize>, Vec<usize>)], threshold: f64) -> Vec<Settling> {
    let n = traj.len();
    groups
        .iter()
        .map(|(xi, yi)| {
            if n == 0 {
                return Settling::NotSettled;
            }
            let last_x = &traj.x[n - 1];
            let last_y = &traj.y[n - 1];
            let inside = |s: usize| {
                let ok = |v: f64, f: f64| (v - f).abs() <= threshold * f.abs() + 1e-12 * (1.0 + f.abs());
                xi.iter().all(|&i| ok(traj.x[s][i], last_x[i])) && yi.iter().all(|&i| ok(traj.y[s][i], last_y[i]))
            };
            // last sample outside the band
            match (0..n).rev().find(|&s| !inside(s)) {
                None => Settling::Settled(traj.times[0]),
                Some(s) if s + 2 < n => Settling::Settled(traj.times[s + 1]),
                Some(_) => Settling::NotSettled,
            }
        })
        .collect()
}
