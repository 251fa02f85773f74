use thiserror::Error;

use super::boxes::AngleBox;
use super::certificate::Certificate;
use super::target::InequalityTarget;
use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error("no box covers the region t1 = {t1}, t2 = {t2}")]
    TileGap { t1: Interval, t2: Interval },
    #[error("box t1 = {t1}, t2 = {t2} overlaps another box or is not a bisection cell")]
    TileOverlap { t1: Interval, t2: Interval },
    #[error("box {index} has lower bound {bound:e} < 0")]
    NegativeBound { index: usize, bound: f64 },
    #[error("box {index} is malformed: {reason}")]
    Malformed { index: usize, reason: String },
    #[error("box count {stored} disagrees with {actual} stored boxes")]
    CountMismatch { stored: usize, actual: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub target: String,
    pub boxes: usize,
    /// Smallest recomputed lower bound.
    pub min_bound: f64,
}

/// Re-check a certificate from scratch: the boxes must be exactly the
/// leaves of a bisection tree rooted at the full angle square (with cells
/// strictly below the diagonal omitted), and every box's factored margin must
/// have a nonnegative lower bound, both as stored and as recomputed.
pub fn replay(cert: &Certificate) -> Result<ReplayReport, ReplayError> {
    let target = cert.target();
    let mut leaves = Vec::with_capacity(cert.boxes.len());
    for (index, rec) in cert.boxes.iter().enumerate() {
        let b = rec.angle_box().map_err(|e| ReplayError::Malformed {
            index,
            reason: e.to_string(),
        })?;
        leaves.push(b);
    }
    check_tiling(&leaves, cert.config.max_depth)?;
    let min_bound = check_bounds(cert, &target, &leaves)?;
    if cert.count != cert.boxes.len() {
        return Err(ReplayError::CountMismatch {
            stored: cert.count,
            actual: cert.boxes.len(),
        });
    }
    Ok(ReplayReport {
        target: target.id(),
        boxes: leaves.len(),
        min_bound,
    })
}

/// `replay` collapsed to a yes/no answer.
pub fn replay_ok(cert: &Certificate) -> bool {
    replay(cert).is_ok()
}

fn check_bounds(
    cert: &Certificate,
    target: &InequalityTarget,
    leaves: &[AngleBox],
) -> Result<f64, ReplayError> {
    let mut min_bound = f64::INFINITY;
    for (index, (rec, b)) in cert.boxes.iter().zip(leaves).enumerate() {
        if !(rec.bound.0 >= 0.0) {
            return Err(ReplayError::NegativeBound {
                index,
                bound: rec.bound.0,
            });
        }
        let lo = target
            .factored_box(b)
            .map(|i| i.lo())
            .unwrap_or(f64::NEG_INFINITY);
        if !(lo >= 0.0) {
            return Err(ReplayError::NegativeBound { index, bound: lo });
        }
        min_bound = min_bound.min(lo);
    }
    Ok(min_bound)
}

fn check_tiling(leaves: &[AngleBox], max_depth: u32) -> Result<(), ReplayError> {
    let mut visited = vec![false; leaves.len()];
    let all: Vec<usize> = (0..leaves.len()).collect();
    descend(&AngleBox::root(), all, leaves, &mut visited, 0, max_depth)?;
    if let Some(i) = visited.iter().position(|v| !v) {
        return Err(overlap(&leaves[i]));
    }
    Ok(())
}

fn overlap(b: &AngleBox) -> ReplayError {
    ReplayError::TileOverlap { t1: b.t1, t2: b.t2 }
}

/// Walk the bisection tree below `node`, where `inside` lists the leaves
/// contained in `node`.
fn descend(
    node: &AngleBox,
    inside: Vec<usize>,
    leaves: &[AngleBox],
    visited: &mut [bool],
    depth: u32,
    max_depth: u32,
) -> Result<(), ReplayError> {
    if inside.is_empty() {
        if node.below_diagonal() {
            return Ok(());
        }
        return Err(ReplayError::TileGap {
            t1: node.t1,
            t2: node.t2,
        });
    }
    if let Some(&hit) = inside.iter().find(|&&i| leaves[i] == *node) {
        visited[hit] = true;
        // anything else inside this cell is covered twice
        if let Some(&other) = inside.iter().find(|&&i| i != hit) {
            return Err(overlap(&leaves[other]));
        }
        return Ok(());
    }
    if depth >= max_depth {
        return Err(overlap(&leaves[inside[0]]));
    }
    let (left, right) = node.bisect().map_err(|_| overlap(&leaves[inside[0]]))?;
    let mut in_left = Vec::new();
    let mut in_right = Vec::new();
    for i in inside {
        if leaves[i].is_subset_of(&left) {
            in_left.push(i);
        } else if leaves[i].is_subset_of(&right) {
            in_right.push(i);
        } else {
            return Err(overlap(&leaves[i]));
        }
    }
    descend(&left, in_left, leaves, visited, depth + 1, max_depth)?;
    descend(&right, in_right, leaves, visited, depth + 1, max_depth)
}
