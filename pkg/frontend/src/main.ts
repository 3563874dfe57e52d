/**
 * Browser entry point: owns the model, one engine link and the render
 * loop.  Rendering is a pure function of the model; every link event or
 * operator click reduces the model and repaints.  Commands are fired and
 * forgotten, the view only moves when a snapshot comes back confirming
 * the change.
 */

import { renderCuelist } from "./cuelist.js";
import {
  applyServerMessage,
  clearToast,
  commandFromDataset,
  commandSent,
  connectionChanged,
  initialModel,
  sendFailed,
  type ConsoleModel,
} from "./model.js";
import { ConsoleLink, type LinkEvent } from "./net.js";
import { renderStageMap } from "./stagemap.js";
import { parseServerMessage } from "./types.js";

const STATUS_LABEL = {
  connecting: "connecting",
  open: "live",
  closed: "offline",
} as const;

let model: ConsoleModel = initialModel();
let toastTimer: ReturnType<typeof setTimeout> | null = null;

function region(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing region #${id}`);
  return node;
}

function render(): void {
  region("cuelist").innerHTML = renderCuelist(model);
  region("stagemap").innerHTML = renderStageMap(model);

  const pill = region("connection");
  pill.textContent = STATUS_LABEL[model.connection];
  pill.className = `pill ${model.connection}`;

  const show = model.hello;
  region("show-name").textContent = show === null ? "" : show.level.name;

  const toast = region("toast");
  toast.textContent = model.toast ?? "";
  toast.className = model.toast === null ? "toast" : "toast visible";

  region("log").innerHTML = model.log
    .slice()
    .reverse()
    .map((entry) => {
      const cls = entry.failed ? "log-entry failed" : "log-entry";
      const at = new Date(entry.at).toLocaleTimeString("en-GB");
      return `<div class="${cls}"><span class="at">${at}</span>${entry.text}</div>`;
    })
    .join("");
}

function update(next: ConsoleModel): void {
  model = next;
  render();
}

function showToastBriefly(): void {
  if (toastTimer !== null) clearTimeout(toastTimer);
  toastTimer = setTimeout(() => {
    toastTimer = null;
    update(clearToast(model));
  }, 4000);
}

function onLinkEvent(event: LinkEvent): void {
  if (event.type === "status") {
    update(connectionChanged(model, event.status));
    return;
  }
  try {
    update(applyServerMessage(model, parseServerMessage(event.text)));
  } catch (error) {
    console.warn("dropping unreadable server frame", error);
  }
}

function serverUrl(): string {
  const fromHash = location.hash.slice(1);
  if (fromHash.startsWith("ws://") || fromHash.startsWith("wss://")) return fromHash;
  return `ws://${location.hostname || "127.0.0.1"}:8080`;
}

const link = new ConsoleLink(serverUrl(), onLinkEvent);

document.addEventListener("click", (event) => {
  const target = event.target;
  if (!(target instanceof Element)) return;
  const control = target.closest<HTMLElement>("[data-cmd]");
  if (control === null) return;
  const command = commandFromDataset(control.dataset);
  if (command === null) return;
  // keep bypass clicks from also folding the surrounding <details>
  if (command.cmd === "bypass") event.preventDefault();
  if (link.send(command)) {
    update(commandSent(model, command, Date.now()));
  } else {
    update(sendFailed(model, command, Date.now()));
    showToastBriefly();
  }
});

render();
link.connect();
