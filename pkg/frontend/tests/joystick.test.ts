import { describe, expect, it } from "vitest";

import { joystickToCommand, releaseCommand, V_MAX, W_MAX } from "../src/joystick.js";

describe("joystick mapping", () => {
  it("maps forward deflection to forward velocity", () => {
    expect(joystickToCommand(0, 1)).toEqual({ v: V_MAX, w: -0 });
    expect(joystickToCommand(0, 0.5).v).toBeCloseTo(V_MAX / 2, 12);
  });

  it("maps rightward deflection to clockwise yaw", () => {
    expect(joystickToCommand(1, 0).w).toBeCloseTo(-W_MAX, 12);
    expect(joystickToCommand(-1, 0).w).toBeCloseTo(W_MAX, 12);
  });

  it("never exceeds the platform limits", () => {
    const cmd = joystickToCommand(5, -7);
    expect(Math.abs(cmd.v)).toBeLessThanOrEqual(V_MAX);
    expect(Math.abs(cmd.w)).toBeLessThanOrEqual(W_MAX);
  });

  it("respects custom limits", () => {
    expect(joystickToCommand(0, 1, 0.1, 0.2)).toEqual({ v: 0.1, w: -0 });
  });

  it("release is always a full stop", () => {
    expect(releaseCommand()).toEqual({ v: 0, w: 0 });
  });
});
