import type { SocketLike } from "../src/client.js";

export class MockSocket implements SocketLike {
  sent: string[] = [];
  closeCalls = 0;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  binaryType?: string;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closeCalls++;
  }

  emit(data: unknown): void {
    this.onmessage?.({ data });
  }

  lastEnvelope(): { seq: number; type: string; data: Record<string, unknown> } {
    const last = this.sent[this.sent.length - 1];
    if (last === undefined) throw new Error("nothing sent");
    return JSON.parse(last);
  }
}

/** Binary camera frame: 16-byte LE header then a PNG-magic payload. */
export function makeFrame(
  streamId: number,
  timestampMs = 1234,
  width = 160,
  height = 120,
): ArrayBuffer {
  const payload = new Uint8Array([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 1, 2, 3]);
  const buffer = new ArrayBuffer(16 + payload.length);
  const view = new DataView(buffer);
  view.setUint32(0, streamId, true);
  view.setUint32(4, timestampMs, true);
  view.setUint32(8, width, true);
  view.setUint32(12, height, true);
  new Uint8Array(buffer, 16).set(payload);
  return buffer;
}
