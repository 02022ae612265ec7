/** Wire types for the teleop service.
 *
 * Commands go out as JSON envelopes over the /ws socket; the server replies
 * with exactly one ack or error per envelope and pushes JSON events plus
 * binary camera frames (16-byte header + PNG payload).
 */

export type CommandType =
  | "drive"
  | "flipper"
  | "arm_jog"
  | "arm_goto"
  | "trigger"
  | "mode_toggle"
  | "request_seal"
  | "swap_canister"
  | "estop"
  | "heartbeat";

export type Mode = "drive" | "arm";

export interface CommandEnvelope {
  seq: number;
  sent_at: number;
  type: CommandType;
  data: Record<string, unknown>;
}

export interface WelcomeEvent {
  type: "welcome";
  session: string;
  role: "driver" | "observer";
}

export interface AckReply {
  type: "ack";
  seq: number;
}

export interface ErrorReply {
  type: "error";
  seq: number | null;
  code: string;
  message: string;
}

export interface PoseEstimate {
  x: number;
  y: number;
  heading: number;
  uncertainty: number;
}

export interface Telemetry {
  time: number;
  battery_voltage: number;
  signal_strength: number;
  pose_estimate: PoseEstimate;
  canister_remaining: number;
  mode: Mode;
  contact_safe: boolean;
  active_seal: { roi_id: string; progress: number } | null;
  watchdog_hold: boolean;
  trigger_on: boolean;
  stuck: boolean;
}

export interface TelemetryEvent {
  type: "telemetry";
  data: Telemetry;
}

export type RoiGeometry =
  | { type: "circle"; center: number[]; radius: number; normal: number[] }
  | { type: "segment"; p0: number[]; p1: number[] }
  | { type: "patch"; centroid: number[]; extent: number[] };

export interface Roi {
  id: string;
  geometry: RoiGeometry;
  peak_gradient_k_per_m: number;
  mean_delta_t_k: number;
  point_count: number;
  map_frame_pose: number[][];
}

export interface RoiListEvent {
  type: "roi_list";
  data: { schema_version: number; rois: Roi[] };
}

export interface SealProgressEvent {
  type: "seal_progress";
  roi_id: string;
  progress: number;
}

export interface SealResultEvent {
  type: "seal_result";
  roi_id: string;
  coverage: number;
  foam_used_m2: number;
  duration_s?: number;
  aborted_reason?: string | null;
}

export interface SealErrorEvent {
  type: "seal_error";
  roi_id: string;
  reason: string;
}

export type ServerEvent =
  | WelcomeEvent
  | AckReply
  | ErrorReply
  | TelemetryEvent
  | RoiListEvent
  | SealProgressEvent
  | SealResultEvent
  | SealErrorEvent;

export type FeedName = "rgb" | "thermal" | "depth";

export const STREAM_IDS: Record<FeedName, number> = {
  rgb: 1,
  thermal: 2,
  depth: 3,
};

export const STREAM_NAMES: Record<number, FeedName> = {
  1: "rgb",
  2: "thermal",
  3: "depth",
};

export interface CameraFrame {
  stream: FeedName;
  timestampMs: number;
  width: number;
  height: number;
  png: Uint8Array;
}

export const FRAME_HEADER_BYTES = 16;
const PNG_MAGIC = [0x89, 0x50, 0x4e, 0x47];

/** Parse one binary frame message; returns null for unknown streams or a
 *  payload that is not a PNG. */
export function parseFrame(buffer: ArrayBuffer): CameraFrame | null {
  if (buffer.byteLength < FRAME_HEADER_BYTES + PNG_MAGIC.length) return null;
  const view = new DataView(buffer);
  const streamId = view.getUint32(0, true);
  const stream = STREAM_NAMES[streamId];
  if (stream === undefined) return null;
  const png = new Uint8Array(buffer, FRAME_HEADER_BYTES);
  for (let i = 0; i < PNG_MAGIC.length; i++) {
    if (png[i] !== PNG_MAGIC[i]) return null;
  }
  return {
    stream,
    timestampMs: view.getUint32(4, true),
    width: view.getUint32(8, true),
    height: view.getUint32(12, true),
    png,
  };
}

export function parseEvent(text: string): ServerEvent | null {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const type = (obj as { type?: unknown }).type;
  if (typeof type !== "string") return null;
  return obj as ServerEvent;
}
