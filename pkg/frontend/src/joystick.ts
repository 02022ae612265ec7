/** Joystick-to-drive mapping.
 *
 * Stick coordinates are normalized to [-1, 1]: +y is forward, +x is right.
 * Forward deflection maps to linear velocity, rightward deflection to a
 * clockwise (negative) yaw rate, matching the robot's z-up convention.
 */

export interface DriveCommand {
  v: number;
  w: number;
}

export const V_MAX = 0.3; // m/s, platform limit
export const W_MAX = 1.0; // rad/s, platform limit

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

export function joystickToCommand(
  x: number,
  y: number,
  vMax: number = V_MAX,
  wMax: number = W_MAX,
): DriveCommand {
  const nx = clamp(x, -1, 1);
  const ny = clamp(y, -1, 1);
  return { v: ny * vMax, w: -nx * wMax };
}

/** Releasing the stick always commands a full stop. */
export function releaseCommand(): DriveCommand {
  return { v: 0, w: 0 };
}
