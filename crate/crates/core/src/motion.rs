//! Per-frame object dynamics.
//!
//! One step moves the centroid by the current speed along the heading, then
//! updates the speed by the acceleration (floored at zero, so a decelerating
//! object stops instead of reversing), then left-multiplies the shape
//! transform by `Shear(hx, hy) · Rot(θ) · Scale(1 + sx, 1 + sy)`.

use crate::geometry::{Affine2, Vec2};
use crate::scene::{Kinematics, ObjectState};

/// The per-frame shape increment for `k`.
pub fn frame_increment(k: &Kinematics) -> Affine2 {
    let scale = Affine2::scale(1.0 + k.scale_rate[0], 1.0 + k.scale_rate[1]);
    let rot = Affine2::rotation(k.rotation_rate);
    let shear = Affine2::shear(k.shear_rate[0], k.shear_rate[1]);
    shear.then_after(&rot.then_after(&scale))
}

fn has_shape_rates(k: &Kinematics) -> bool {
    k.rotation_rate != 0.0 || k.scale_rate != [0.0; 2] || k.shear_rate != [0.0; 2]
}

/// Advances `state` by one frame in place.
pub fn step_in_place(state: &mut ObjectState) {
    let k = &mut state.motion;
    if k.speed != 0.0 {
        state.position = state.position + Vec2::from_polar(k.speed, k.direction);
    }
    k.speed = (k.speed + k.accel).max(0.0);
    if has_shape_rates(k) {
        state.transform = frame_increment(k).then_after(&state.transform);
    }
}

pub fn step_state(state: &ObjectState) -> ObjectState {
    let mut next = state.clone();
    step_in_place(&mut next);
    next
}

/// The state after `t` steps. Iterates the recurrence, so the result is
/// bit-identical to `t` calls of [`step_state`].
pub fn object_at_frame(initial: &ObjectState, t: u32) -> ObjectState {
    let mut s = initial.clone();
    for _ in 0..t {
        step_in_place(&mut s);
    }
    s
}

/// Position and transform of every object for frames `0..frames`, frame-major.
pub fn trajectory(objects: &[ObjectState], frames: u32) -> Vec<Vec<(Vec2, Affine2)>> {
    let mut states: Vec<ObjectState> = objects.to_vec();
    let mut out = Vec::with_capacity(frames as usize);
    for t in 0..frames {
        if t > 0 {
            states.iter_mut().for_each(step_in_place);
        }
        out.push(states.iter().map(|s| (s.position, s.transform)).collect());
    }
    out
}
