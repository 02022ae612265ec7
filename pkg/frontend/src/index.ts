export * from "./protocol.js";
export * from "./joystick.js";
export * from "./state.js";
export * from "./client.js";
