//! Court geometry and game clock restated from the NBA rulebook numbers,
//! without the production constants or code paths.
#![allow(dead_code)]

use storylink_core::domain::Region;

/// Region of a half-court point in feet, basket at the origin.
pub fn region(x: f64, y: f64) -> Option<Region> {
    if !(-25.0..=25.0).contains(&x) || !(0.0..=47.0).contains(&y) {
        return None;
    }
    let d2 = x * x + y * y;
    let in_circle = |radius: f64| d2 <= radius * radius;
    let in_paint_box = (-8.0..=8.0).contains(&x) && y <= 19.0;
    let in_corner = y <= 14.0 && (x <= -22.0 || x >= 22.0);
    let beyond_arc = d2 >= 23.75 * 23.75;
    Some(if in_circle(4.0) {
        Region::RestrictedArea
    } else if in_paint_box {
        Region::Paint
    } else if in_corner || beyond_arc {
        Region::ThreePoint
    } else {
        Region::Midrange
    })
}

/// Seconds since tipoff: four 12-minute quarters, then 5-minute overtimes.
pub fn elapsed(period: u32, clock: f64) -> f64 {
    if period <= 4 {
        f64::from(period) * 720.0 - clock
    } else {
        2880.0 + f64::from(period - 4) * 300.0 - clock
    }
}

pub fn period_length(period: u32) -> f64 {
    if period <= 4 { 720.0 } else { 300.0 }
}
