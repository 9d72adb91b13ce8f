//! Direction-length classification, critical-point detection and tokenization.
//!
//! A stroke whose x-extent is at least its y-extent is *horizontal*; its
//! critical points are windowed extrema of the y sequence. Vertical strokes
//! use the x sequence instead. Critical points cut the stroke into tokens.

use serde::{Deserialize, Serialize};

use crate::ink::{Stroke, Token};

/// Default fraction of a stroke's point count used as the one-sided window.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionLength {
    pub value: Direction,
    /// `(x_max - x_min) - (y_max - y_min)`.
    pub raw_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub stroke_index: usize,
    pub point_index: usize,
    pub kind: ExtremumKind,
}

/// Output of [`detect_critical_points`].
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPointScan {
    pub points: Vec<CriticalPoint>,
    /// One-sided window size `m`.
    pub window: usize,
    /// Set when the stroke has fewer than `2m + 1` points; `points` is then empty.
    pub too_short: bool,
}

pub fn direction_length(stroke: &Stroke) -> DirectionLength {
    let bb = stroke.bounding_box();
    let raw_length = bb.width() - bb.height();
    let value = if raw_length >= 0.0 {
        Direction::Horizontal
    } else {
        Direction::Vertical
    };
    DirectionLength { value, raw_length }
}

/// One-sided window size for a stroke of `n` points: `max(1, floor(fraction * n))`.
pub fn window_size(n: usize, window_fraction: f64) -> usize {
    ((window_fraction * n as f64).floor() as usize).max(1)
}

/// The coordinate sequence examined for extrema: y for horizontal strokes,
/// x for vertical ones.
pub fn scan_axis(stroke: &Stroke, direction: Direction) -> Vec<f64> {
    stroke
        .points()
        .iter()
        .map(|p| match direction {
            Direction::Horizontal => p.y,
            Direction::Vertical => p.x,
        })
        .collect()
}

/// Finds windowed local maxima and minima.
///
/// Index `k` is a maximum when the scanned values are non-decreasing over
/// `k-m..=k`, non-increasing over `k..=k+m`, and strictly above at least one
/// value in that window. Minima mirror this. Of the qualifying indices inside
/// one equal-valued run only the first is reported.
///
/// # Panics
///
/// Panics if `window_fraction` is not in `(0, 1)`.
pub fn detect_critical_points(
    stroke: &Stroke,
    stroke_index: usize,
    dl: &DirectionLength,
    window_fraction: f64,
) -> CriticalPointScan {
    assert!(
        window_fraction > 0.0 && window_fraction < 1.0,
        "window fraction must lie in (0, 1), got {window_fraction}"
    );
    let v = scan_axis(stroke, dl.value);
    let n = v.len();
    let m = window_size(n, window_fraction);
    if n < 2 * m + 1 {
        return CriticalPointScan {
            points: Vec::new(),
            window: m,
            too_short: true,
        };
    }

    // Lengths of monotone runs ending at / starting from each index.
    let mut rising_into = vec![0usize; n];
    let mut falling_into = vec![0usize; n];
    for k in 1..n {
        if v[k - 1] <= v[k] {
            rising_into[k] = rising_into[k - 1] + 1;
        }
        if v[k - 1] >= v[k] {
            falling_into[k] = falling_into[k - 1] + 1;
        }
    }
    let mut falling_from = vec![0usize; n];
    let mut rising_from = vec![0usize; n];
    for k in (0..n - 1).rev() {
        if v[k] >= v[k + 1] {
            falling_from[k] = falling_from[k + 1] + 1;
        }
        if v[k] <= v[k + 1] {
            rising_from[k] = rising_from[k + 1] + 1;
        }
    }

    // Start of the equal-valued run containing each index.
    let mut run_start = vec![0usize; n];
    for k in 1..n {
        run_start[k] = if v[k] == v[k - 1] { run_start[k - 1] } else { k };
    }

    let mut points: Vec<CriticalPoint> = Vec::new();
    for k in m..n - m {
        // With monotone flanks the window's extreme opposite values sit at k±m.
        let kind = if rising_into[k] >= m
            && falling_from[k] >= m
            && (v[k] > v[k - m] || v[k] > v[k + m])
        {
            Some(ExtremumKind::Maximum)
        } else if falling_into[k] >= m
            && rising_from[k] >= m
            && (v[k] < v[k - m] || v[k] < v[k + m])
        {
            Some(ExtremumKind::Minimum)
        } else {
            None
        };
        let Some(kind) = kind else {
            continue;
        };
        let same_plateau = points
            .iter()
            .rev()
            .take_while(|p| p.point_index >= run_start[k])
            .any(|p| p.kind == kind);
        if !same_plateau {
            points.push(CriticalPoint {
                stroke_index,
                point_index: k,
                kind,
            });
        }
    }

    CriticalPointScan {
        points,
        window: m,
        too_short: false,
    }
}

/// Cuts a stroke at its critical points.
///
/// A critical point at `k` closes the current token at `k`; the next starts
/// at `k + 1`. A cut that would leave a one-point token is skipped so the
/// point joins the following token (or the preceding one at the stroke end).
pub fn tokenize(stroke: &Stroke, stroke_index: usize, cps: &[CriticalPoint]) -> Vec<Token> {
    let n = stroke.len();
    let mut tokens = Vec::with_capacity(cps.len() + 1);
    let mut start = 0;
    for cp in cps {
        let k = cp.point_index;
        debug_assert!(k < n);
        if k + 1 >= n || k < start + 1 {
            continue;
        }
        tokens.push(Token {
            parent_stroke_index: stroke_index,
            start_index: start,
            end_index: k,
        });
        start = k + 1;
    }
    if start + 1 < n {
        tokens.push(Token {
            parent_stroke_index: stroke_index,
            start_index: start,
            end_index: n - 1,
        });
    } else if let Some(last) = tokens.last_mut() {
        last.end_index = n - 1;
    } else {
        tokens.push(Token {
            parent_stroke_index: stroke_index,
            start_index: 0,
            end_index: n - 1,
        });
    }
    tokens
}

/// Everything segmentation produces for one stroke.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokeSegmentation {
    pub direction: DirectionLength,
    pub scan: CriticalPointScan,
    pub tokens: Vec<Token>,
}

pub fn segment_stroke(stroke: &Stroke, stroke_index: usize, window_fraction: f64) -> StrokeSegmentation {
    let direction = direction_length(stroke);
    let scan = detect_critical_points(stroke, stroke_index, &direction, window_fraction);
    let tokens = tokenize(stroke, stroke_index, &scan.points);
    StrokeSegmentation {
        direction,
        scan,
        tokens,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn horizontal(ys: &[f64]) -> Stroke {
        let pts: Vec<_> = ys.iter().enumerate().map(|(i, &y)| (i as f64 * 10.0, y)).collect();
        Stroke::from_xy(&pts).unwrap()
    }

    fn cps_of(s: &Stroke, fraction: f64) -> Vec<(usize, ExtremumKind)> {
        let dl = direction_length(s);
        detect_critical_points(s, 0, &dl, fraction)
            .points
            .iter()
            .map(|c| (c.point_index, c.kind))
            .collect()
    }

    #[test]
    fn direction_length_cases() {
        let h = Stroke::from_xy(&[(0.0, 0.0), (10.0, 4.0)]).unwrap();
        assert_eq!(
            direction_length(&h),
            DirectionLength { value: Direction::Horizontal, raw_length: 6.0 }
        );
        let v = Stroke::from_xy(&[(0.0, 0.0), (3.0, 9.0)]).unwrap();
        assert_eq!(
            direction_length(&v),
            DirectionLength { value: Direction::Vertical, raw_length: -6.0 }
        );
        let tie = Stroke::from_xy(&[(0.0, 0.0), (5.0, 5.0)]).unwrap();
        assert_eq!(direction_length(&tie).value, Direction::Horizontal);
        assert_eq!(direction_length(&tie).raw_length, 0.0);
    }

    #[test]
    fn window_size_floor_and_minimum() {
        assert_eq!(window_size(7, 0.05), 1);
        assert_eq!(window_size(40, 0.05), 2);
        assert_eq!(window_size(119, 0.05), 5);
        assert_eq!(window_size(120, 0.05), 6);
    }

    #[test]
    fn single_peak_and_valley() {
        let s = horizontal(&[0.0, 1.0, 2.0, 3.0, 2.0, 1.0, 0.0]);
        assert_eq!(cps_of(&s, 0.05), vec![(3, ExtremumKind::Maximum)]);
        let s = horizontal(&[3.0, 2.0, 1.0, 0.0, 1.0, 2.0, 3.0]);
        assert_eq!(cps_of(&s, 0.05), vec![(3, ExtremumKind::Minimum)]);
    }

    #[test]
    fn monotone_has_no_critical_points() {
        let s = horizontal(&[0.0, 0.5, 1.0, 1.5, 2.0, 2.5]);
        assert!(cps_of(&s, 0.05).is_empty());
        assert_eq!(tokenize(&s, 0, &[]).len(), 1);
    }

    #[test]
    fn plateau_reports_first_index() {
        let s = horizontal(&[0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0]);
        assert_eq!(cps_of(&s, 0.05), vec![(2, ExtremumKind::Maximum)]);
    }

    #[test]
    fn vertical_stroke_scans_x() {
        let xs = [0.0, 1.0, 2.0, 3.0, 2.0, 1.0, 0.0];
        let pts: Vec<_> = xs.iter().enumerate().map(|(i, &x)| (x, i as f64 * 10.0)).collect();
        let s = Stroke::from_xy(&pts).unwrap();
        assert_eq!(direction_length(&s).value, Direction::Vertical);
        assert_eq!(cps_of(&s, 0.05), vec![(3, ExtremumKind::Maximum)]);
    }

    #[test]
    fn short_stroke_flags_diagnostic() {
        let s = horizontal(&[0.0, 1.0]);
        let dl = direction_length(&s);
        let scan = detect_critical_points(&s, 0, &dl, 0.05);
        assert!(scan.too_short);
        assert!(scan.points.is_empty());
    }

    #[test]
    #[should_panic]
    fn rejects_bad_window_fraction() {
        let s = horizontal(&[0.0, 1.0, 0.0]);
        detect_critical_points(&s, 0, &direction_length(&s), 1.0);
    }

    fn cp(k: usize) -> CriticalPoint {
        CriticalPoint { stroke_index: 0, point_index: k, kind: ExtremumKind::Maximum }
    }

    fn ranges(tokens: &[Token]) -> Vec<(usize, usize)> {
        tokens.iter().map(|t| (t.start_index, t.end_index)).collect()
    }

    #[test]
    fn tokenize_cut_rule() {
        let s = horizontal(&[0.0, 1.0, 2.0, 3.0, 2.0, 1.0, 0.0]);
        assert_eq!(ranges(&tokenize(&s, 0, &[cp(3)])), vec![(0, 3), (4, 6)]);
        assert_eq!(ranges(&tokenize(&s, 0, &[])), vec![(0, 6)]);
    }

    #[test]
    fn tokenize_merges_one_point_tokens() {
        let s = horizontal(&[0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(ranges(&tokenize(&s, 0, &[cp(1), cp(2)])), vec![(0, 1), (2, 4)]);
        // A cut one before the end would strand the last point.
        assert_eq!(ranges(&tokenize(&s, 0, &[cp(3)])), vec![(0, 4)]);
        assert_eq!(ranges(&tokenize(&s, 0, &[cp(1), cp(3)])), vec![(0, 1), (2, 4)]);
    }
}
