/** Minimal DOM wiring for the operator console.
 *
 * Build with `npx tsc -p tsconfig.build.json` and open index.html while
 * `atticsim serve` is running on the same host.
 */

import { ConsoleClient, type SocketLike } from "./client.js";
import type { FeedName } from "./protocol.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

export function mount(wsUrl: string): ConsoleClient {
  const socket = new WebSocket(wsUrl) as unknown as SocketLike;
  const client = new ConsoleClient(socket);
  client.startHeartbeat(200);

  const status = el<HTMLElement>("status");
  const roiList = el<HTMLUListElement>("rois");
  const frameImg = el<HTMLImageElement>("frame");
  let frameUrl: string | null = null;

  client.onChange((state) => {
    const t = state.telemetry;
    status.textContent = t
      ? `${state.role} | mode ${t.mode} | ${t.battery_voltage.toFixed(1)} V | ` +
        `pose (${t.pose_estimate.x.toFixed(2)}, ${t.pose_estimate.y.toFixed(2)}) | ` +
        `foam ${t.canister_remaining.toFixed(2)} m²` +
        (t.watchdog_hold ? " | WATCHDOG HOLD" : "") +
        (state.seal ? ` | seal ${(state.seal.progress * 100).toFixed(0)}%` : "")
      : "connecting…";

    roiList.replaceChildren(
      ...state.rois.map((roi) => {
        const li = document.createElement("li");
        const button = document.createElement("button");
        button.textContent = `seal ${roi.id} (${roi.geometry.type})`;
        button.onclick = () => {
          void client.modeToggle("arm").then(() => client.requestSeal(roi.id));
        };
        li.append(button);
        return li;
      }),
    );

    if (state.lastFrame !== null) {
      if (frameUrl !== null) URL.revokeObjectURL(frameUrl);
      frameUrl = URL.createObjectURL(
        new Blob([state.lastFrame.png.slice()], { type: "image/png" }),
      );
      frameImg.src = frameUrl;
    }
  });

  for (const feed of ["rgb", "thermal", "depth"] as FeedName[]) {
    el<HTMLButtonElement>(`feed-${feed}`).onclick = () => client.setFeed(feed);
  }
  el<HTMLButtonElement>("estop").onclick = () => void client.estop();
  el<HTMLButtonElement>("mode-drive").onclick = () => void client.modeToggle("drive");
  el<HTMLButtonElement>("mode-arm").onclick = () => void client.modeToggle("arm");

  // keyboard joystick: WASD while held, stop on release
  const held = new Set<string>();
  const sendStick = () => {
    const x = (held.has("d") ? 1 : 0) - (held.has("a") ? 1 : 0);
    const y = (held.has("w") ? 1 : 0) - (held.has("s") ? 1 : 0);
    if (x === 0 && y === 0) void client.releaseJoystick();
    else void client.drive(x, y);
  };
  window.addEventListener("keydown", (ev) => {
    if ("wasd".includes(ev.key) && !held.has(ev.key)) {
      held.add(ev.key);
      sendStick();
    }
  });
  window.addEventListener("keyup", (ev) => {
    if (held.delete(ev.key)) sendStick();
  });

  return client;
}
