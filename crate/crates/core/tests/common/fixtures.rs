//! Hand-enumerated evaluation fixtures.

use gazekit::evalkit::{Response, Truth};
use gazekit::geometry::*;

pub fn scene() -> SceneLayout {
    SceneLayout::default()
}

pub fn tid(r: u8, c: u8) -> TargetId {
    TargetId::new(r, c).unwrap()
}

pub fn truth(id: &str, looker: &str, t: TargetId) -> Truth {
    let s = scene();
    Truth {
        trial_id: id.into(),
        looker_id: looker.into(),
        target: t,
        direction: gaze_to_target(Vec3::ZERO, s.grid.target(t).unwrap()).unwrap(),
        eye_center: Vec3::ZERO,
    }
}

/// (row, col)
type Cell = (u8, u8);
/// (azimuth, elevation) in degrees
type AzEl = (f64, f64);

/// Ten trials: 3 exact, 4 more within one row and one column, 2 misses and
/// 1 invalid response.
pub fn accuracy_fixture() -> (Vec<Response>, Vec<Truth>) {
    let rows: [(&str, Cell, Option<Cell>); 10] = [
        ("t01", (2, 5), Some((2, 5))),
        ("t02", (3, 7), Some((3, 8))),
        ("t03", (1, 1), Some((2, 2))),
        ("t04", (4, 13), Some((2, 13))),
        ("t05", (2, 9), Some((2, 9))),
        ("t06", (3, 3), None),
        ("t07", (1, 7), Some((1, 7))),
        ("t08", (4, 6), Some((3, 5))),
        ("t09", (2, 10), Some((2, 12))),
        ("t10", (3, 11), Some((4, 11))),
    ];
    let truths = rows
        .iter()
        .map(|(id, (r, c), _)| truth(id, "A", tid(*r, *c)))
        .collect();
    let responses = rows
        .iter()
        .map(|(id, _, p)| match p {
            Some((r, c)) => Response::target(*id, tid(*r, *c)),
            None => Response::invalid(*id, "no answer"),
        })
        .collect();
    (responses, truths)
}

/// Six trials with continuous answers offset by `(d_az, d_el)` degrees.
/// Column errors (peripheral positive): +2, +2, +1, -4, -1.
/// Row errors (downward positive): +1, -1, +3, 0, +2. One invalid.
pub fn bias_fixture() -> (Vec<Response>, Vec<Truth>) {
    let s = scene();
    let rows: [(&str, Cell, Option<AzEl>); 6] = [
        ("b1", (2, 3), Some((-2.0, -1.0))),
        ("b2", (2, 11), Some((2.0, 1.0))),
        ("b3", (3, 7), Some((1.0, -3.0))),
        ("b4", (1, 5), Some((4.0, 0.0))),
        ("b5", (4, 9), Some((-1.0, -2.0))),
        ("b6", (3, 2), None),
    ];
    let truths: Vec<Truth> = rows
        .iter()
        .map(|(id, (r, c), _)| truth(id, "A", tid(*r, *c)))
        .collect();
    let responses = rows
        .iter()
        .zip(&truths)
        .map(|((id, _, d), t)| match d {
            Some((daz, del)) => {
                let dir = GazeDirection::from_az_el(
                    t.direction.azimuth_deg() + daz,
                    t.direction.elevation_deg() + del,
                );
                Response::direction(*id, dir, Vec3::ZERO, &s)
            }
            None => Response::invalid(*id, "no answer"),
        })
        .collect();
    (responses, truths)
}
