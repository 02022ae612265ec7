/** Console state and the reducer that folds server events into it. */

import type {
  CameraFrame,
  FeedName,
  Roi,
  ServerEvent,
  Telemetry,
} from "./protocol.js";

export interface SealStatus {
  roiId: string;
  progress: number;
  done: boolean;
  coverage: number | null;
  error: string | null;
}

export interface ConsoleState {
  connected: boolean;
  sessionId: string | null;
  role: "driver" | "observer" | null;
  telemetry: Telemetry | null;
  rois: Roi[];
  seal: SealStatus | null;
  selectedFeed: FeedName;
  lastFrame: CameraFrame | null;
  framesReceived: Record<FeedName, number>;
  lastError: { code: string; message: string } | null;
}

export function initialState(): ConsoleState {
  return {
    connected: false,
    sessionId: null,
    role: null,
    telemetry: null,
    rois: [],
    seal: null,
    selectedFeed: "rgb",
    lastFrame: null,
    framesReceived: { rgb: 0, thermal: 0, depth: 0 },
    lastError: null,
  };
}

export function reduceEvent(state: ConsoleState, event: ServerEvent): ConsoleState {
  switch (event.type) {
    case "welcome":
      return { ...state, connected: true, sessionId: event.session, role: event.role };
    case "ack":
      return state;
    case "error":
      return { ...state, lastError: { code: event.code, message: event.message } };
    case "telemetry":
      return { ...state, telemetry: event.data };
    case "roi_list":
      return { ...state, rois: event.data.rois };
    case "seal_progress":
      return {
        ...state,
        seal: {
          roiId: event.roi_id,
          progress: event.progress,
          done: false,
          coverage: null,
          error: null,
        },
      };
    case "seal_result":
      return {
        ...state,
        seal: {
          roiId: event.roi_id,
          progress: 1,
          done: true,
          coverage: event.coverage,
          error: event.aborted_reason ?? null,
        },
      };
    case "seal_error":
      return {
        ...state,
        seal: {
          roiId: event.roi_id,
          progress: 0,
          done: true,
          coverage: null,
          error: event.reason,
        },
      };
    default:
      return state;
  }
}

/** Fold in a binary camera frame; only the selected feed is displayed but
 *  per-stream counters always advance. */
export function reduceFrame(state: ConsoleState, frame: CameraFrame): ConsoleState {
  const framesReceived = {
    ...state.framesReceived,
    [frame.stream]: state.framesReceived[frame.stream] + 1,
  };
  const lastFrame = frame.stream === state.selectedFeed ? frame : state.lastFrame;
  return { ...state, framesReceived, lastFrame };
}

export function selectFeed(state: ConsoleState, feed: FeedName): ConsoleState {
  if (feed === state.selectedFeed) return state;
  // switching feeds is purely a display choice; the socket stays up and
  // the stale frame is dropped rather than shown under the wrong label
  return { ...state, selectedFeed: feed, lastFrame: null };
}
