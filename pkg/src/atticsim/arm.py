"""5-DOF arm kinematics with a dispensing-gun tip.

Joint order: waist yaw, shoulder pitch, elbow pitch, wrist pitch, wrist roll.
Pitch angles are measured in the vertical plane through the waist axis,
positive up from horizontal.  The tool (approach) axis is the direction of
the last link; wrist roll spins about it and does not move the tip.
"""

from __future__ import annotations

import math

import numpy as np

from .robot import ArmGeometry

IK_TOL = 1e-6


class Unreachable(ValueError):
    pass


class JointLimitError(ValueError):
    pass


def check_limits(arm: ArmGeometry, joints) -> None:
    for i, (q, (lo, hi)) in enumerate(zip(joints, arm.joint_limits)):
        if not lo - 1e-9 <= q <= hi + 1e-9:
            raise JointLimitError(f"joint {i} = {q:.4f} outside [{lo:.3f}, {hi:.3f}]")


def arm_fk(arm: ArmGeometry, joints) -> tuple[np.ndarray, np.ndarray]:
    """Gun-tip position and approach direction in the arm base frame."""
    if len(joints) != 5:
        raise ValueError("expected 5 joint angles")
    check_limits(arm, joints)
    q1, q2, q3, q4, _q5 = (float(q) for q in joints)
    l4 = arm.wrist_to_flange + arm.gun_tip_offset
    a23 = q2 + q3
    a234 = a23 + q4
    r = arm.upper_arm * math.cos(q2) + arm.forearm * math.cos(a23) + l4 * math.cos(a234)
    z = arm.base_height + arm.upper_arm * math.sin(q2) \
        + arm.forearm * math.sin(a23) + l4 * math.sin(a234)
    c1, s1 = math.cos(q1), math.sin(q1)
    position = np.array([r * c1, r * s1, z])
    approach = np.array([math.cos(a234) * c1, math.cos(a234) * s1, math.sin(a234)])
    return position, approach


def arm_ik(arm: ArmGeometry, target_position, approach) -> tuple[list[float], np.ndarray]:
    """Solve joints for a tip position and approach direction.

    A 5-DOF arm cannot meet arbitrary approach directions: the approach must
    lie in the vertical plane through the waist axis and the target.  If it
    does not, the nearest in-plane direction is used; the achieved approach
    is returned alongside the joints.
    """
    p = np.asarray(target_position, dtype=float)
    a = np.asarray(approach, dtype=float)
    n = np.linalg.norm(a)
    if abs(n - 1.0) > 1e-6:
        raise ValueError("approach must be a unit vector")
    a = a / n

    l4 = arm.wrist_to_flange + arm.gun_tip_offset
    a2, a3 = arm.upper_arm, arm.forearm
    r_t = math.hypot(p[0], p[1])
    base_q1 = math.atan2(p[1], p[0]) if r_t > 1e-12 else 0.0
    flipped = math.atan2(math.sin(base_q1 + math.pi),
                         math.cos(base_q1 + math.pi))

    last_err: Exception | None = None
    # two waist branches: facing the target and facing away (the in-plane
    # radial coordinate goes negative for the flipped branch)
    for q1 in (base_q1, flipped):
        c1, s1 = math.cos(q1), math.sin(q1)
        # project the approach into the vertical plane through the waist
        # axis and the target
        a_r = a[0] * c1 + a[1] * s1
        a_z = a[2]
        norm_in_plane = math.hypot(a_r, a_z)
        if norm_in_plane < 1e-9:
            # approach perpendicular to the plane: point at the target
            a_r, a_z = 1.0, 0.0
            norm_in_plane = 1.0
        psi = math.atan2(a_z / norm_in_plane, a_r / norm_in_plane)
        achieved = np.array([math.cos(psi) * c1, math.cos(psi) * s1,
                             math.sin(psi)])

        r_w = (p[0] * c1 + p[1] * s1) - l4 * math.cos(psi)
        z_w = p[2] - arm.base_height - l4 * math.sin(psi)
        d2 = r_w * r_w + z_w * z_w
        cos_elbow = (d2 - a2 * a2 - a3 * a3) / (2.0 * a2 * a3)
        if cos_elbow > 1.0 + 1e-9 or cos_elbow < -1.0 - 1e-9:
            if last_err is None:
                last_err = Unreachable(
                    f"wrist center at {math.sqrt(d2):.3f} m outside "
                    f"[{abs(a2 - a3):.3f}, {a2 + a3:.3f}] m annulus")
            continue
        cos_elbow = min(max(cos_elbow, -1.0), 1.0)
        elbow = math.acos(cos_elbow)

        for q3 in (-elbow, elbow):
            q2 = math.atan2(z_w, r_w) - math.atan2(a3 * math.sin(q3),
                                                   a2 + a3 * math.cos(q3))
            q4 = psi - q2 - q3
            q4 = math.atan2(math.sin(q4), math.cos(q4))
            joints = [q1, q2, q3, q4, 0.0]
            try:
                check_limits(arm, joints)
            except JointLimitError as exc:
                last_err = exc
                continue
            pos, _ = arm_fk(arm, joints)
            if np.linalg.norm(pos - p) < IK_TOL:
                return joints, achieved
            last_err = Unreachable(
                f"round-trip error {np.linalg.norm(pos - p):.2e} m")
    if isinstance(last_err, JointLimitError):
        raise last_err
    raise Unreachable(str(last_err) if last_err else "no solution")


def reachable(arm: ArmGeometry, target_position, approach=(0.0, 0.0, -1.0)) -> bool:
    try:
        arm_ik(arm, target_position, approach)
        return True
    except (Unreachable, JointLimitError):
        return False
