/** Transport-agnostic console client.
 *
 * Wraps anything WebSocket-shaped (browser WebSocket or the `ws` package),
 * numbers outgoing envelopes, matches the exactly-once ack/error replies,
 * and folds server events and binary camera frames into ConsoleState.
 */

import { joystickToCommand, releaseCommand } from "./joystick.js";
import {
  type AckReply,
  type CommandEnvelope,
  type CommandType,
  type ErrorReply,
  type FeedName,
  type Mode,
  parseEvent,
  parseFrame,
} from "./protocol.js";
import {
  type ConsoleState,
  initialState,
  reduceEvent,
  reduceFrame,
  selectFeed,
} from "./state.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: unknown }) => void) | null;
  binaryType?: string;
}

export type Reply = AckReply | ErrorReply;

interface Pending {
  resolve: (reply: Reply) => void;
}

export class ProtocolViolation extends Error {}

export class ConsoleClient {
  private socket: SocketLike;
  private state: ConsoleState = initialState();
  private nextSeq = 1;
  private pending = new Map<number, Pending>();
  private settled = new Set<number>();
  private heartbeatTimer: ReturnType<typeof setInterval> | null = null;
  private listeners: Array<(state: ConsoleState) => void> = [];
  /** every drive payload sent, in order — the last entry after a joystick
   *  release must be a full stop */
  readonly driveLog: Array<{ v: number; w: number }> = [];

  constructor(socket: SocketLike) {
    this.socket = socket;
    if ("binaryType" in socket) socket.binaryType = "arraybuffer";
    socket.onmessage = (ev) => this.handleMessage(ev.data);
  }

  getState(): ConsoleState {
    return this.state;
  }

  onChange(listener: (state: ConsoleState) => void): void {
    this.listeners.push(listener);
  }

  private setState(next: ConsoleState): void {
    this.state = next;
    for (const listener of this.listeners) listener(next);
  }

  // -- outgoing --------------------------------------------------------------

  send(type: CommandType, data: Record<string, unknown> = {}): Promise<Reply> {
    const envelope: CommandEnvelope = {
      seq: this.nextSeq++,
      sent_at: Date.now(),
      type,
      data,
    };
    const promise = new Promise<Reply>((resolve) => {
      this.pending.set(envelope.seq, { resolve });
    });
    this.socket.send(JSON.stringify(envelope));
    return promise;
  }

  drive(x: number, y: number): Promise<Reply> {
    const cmd = joystickToCommand(x, y);
    this.driveLog.push(cmd);
    return this.send("drive", { v: cmd.v, w: cmd.w });
  }

  releaseJoystick(): Promise<Reply> {
    const cmd = releaseCommand();
    this.driveLog.push(cmd);
    return this.send("drive", { v: cmd.v, w: cmd.w });
  }

  modeToggle(mode: Mode): Promise<Reply> {
    return this.send("mode_toggle", { mode });
  }

  requestSeal(roiId: string): Promise<Reply> {
    return this.send("request_seal", { roi_id: roiId });
  }

  trigger(on: boolean): Promise<Reply> {
    return this.send("trigger", { on });
  }

  swapCanister(): Promise<Reply> {
    return this.send("swap_canister");
  }

  estop(): Promise<Reply> {
    return this.send("estop");
  }

  heartbeat(): Promise<Reply> {
    return this.send("heartbeat");
  }

  startHeartbeat(intervalMs = 200): void {
    this.stopHeartbeat();
    this.heartbeatTimer = setInterval(() => void this.heartbeat(), intervalMs);
  }

  stopHeartbeat(): void {
    if (this.heartbeatTimer !== null) {
      clearInterval(this.heartbeatTimer);
      this.heartbeatTimer = null;
    }
  }

  /** Pure display-side switch: no reconnect, no socket traffic. */
  setFeed(feed: FeedName): void {
    this.setState(selectFeed(this.state, feed));
  }

  close(): void {
    this.stopHeartbeat();
    this.socket.close();
  }

  // -- incoming --------------------------------------------------------------

  handleMessage(data: unknown): void {
    if (typeof data === "string") {
      this.handleText(data);
      return;
    }
    const buffer = toArrayBuffer(data);
    if (buffer === null) return;
    const frame = parseFrame(buffer);
    if (frame !== null) this.setState(reduceFrame(this.state, frame));
  }

  private handleText(text: string): void {
    const event = parseEvent(text);
    if (event === null) return;
    if (event.type === "ack" || event.type === "error") {
      const seq = event.seq;
      if (typeof seq === "number") {
        if (this.settled.has(seq)) {
          throw new ProtocolViolation(`duplicate reply for seq ${seq}`);
        }
        this.settled.add(seq);
        const pending = this.pending.get(seq);
        if (pending !== undefined) {
          this.pending.delete(seq);
          pending.resolve(event);
        }
      }
    }
    this.setState(reduceEvent(this.state, event));
  }
}

function toArrayBuffer(data: unknown): ArrayBuffer | null {
  if (data instanceof ArrayBuffer) return data;
  if (ArrayBuffer.isView(data)) {
    const view = data as Uint8Array;
    const copy = new Uint8Array(view.byteLength);
    copy.set(view);
    return copy.buffer;
  }
  return null;
}
