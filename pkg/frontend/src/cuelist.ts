/**
 * Cuelist panel renderer.
 *
 * Pure string-building from the model: the active cuelist as rows, the
 * current pointer highlighted, each cue expandable into its sets with
 * bypass toggles.  No DOM access, so the same functions run under node
 * for tests.
 */

import { activeCuelist, effectiveBypass, type ConsoleModel } from "./model.js";
import type { SetSummary } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function renderSetRow(model: ConsoleModel, cueId: number, index: number, set: SetSummary): string {
  const bypassed = effectiveBypass(model, cueId, index);
  const rowClass = bypassed ? "set bypassed" : "set";
  const toggleClass = bypassed ? "bypass-toggle active" : "bypass-toggle";
  const target = set.target === undefined ? "" : `<span class="target">${escapeHtml(set.target)}</span>`;
  return [
    `<li class="${rowClass}" data-cue="${cueId}" data-set="${index}">`,
    `<button class="${toggleClass}" data-cmd="bypass" data-cue="${cueId}" data-set="${index}"`,
    ` title="toggle bypass">byp</button>`,
    `<span class="kind">${set.type}</span>`,
    target,
    `</li>`,
  ].join("");
}

function renderCueRow(model: ConsoleModel, cueId: number, current: boolean): string {
  const cue = model.hello?.cues[String(cueId)];
  const label = cue === undefined ? "?" : escapeHtml(cue.label);
  const sets = cue === undefined ? [] : cue.sets;
  const rowClass = current ? "cue current" : "cue";
  const badge = current ? `<span class="badge current-badge">current</span>` : "";
  return [
    `<details class="${rowClass}" data-cue="${cueId}"${current ? " open" : ""}>`,
    `<summary><span class="num">${cueId}</span><span class="label">${label}</span>${badge}</summary>`,
    `<ul class="sets">`,
    ...sets.map((set, index) => renderSetRow(model, cueId, index, set)),
    `</ul>`,
    `</details>`,
  ].join("");
}

function renderTabs(model: ConsoleModel, active: string): string {
  const hello = model.hello;
  if (hello === null) return "";
  const tabs = Object.keys(hello.cuelists)
    .sort()
    .map((name) => {
      const cls = name === active ? "tab active" : "tab";
      return `<button class="${cls}" data-cmd="select" data-name="${escapeHtml(name)}">${escapeHtml(name)}</button>`;
    });
  return `<nav class="cuelist-tabs">${tabs.join("")}</nav>`;
}

export function renderCuelist(model: ConsoleModel): string {
  const parts: string[] = [];
  if (model.connection !== "open") {
    parts.push(`<div class="banner reconnect">connection lost, reconnecting&hellip;</div>`);
  }
  const list = activeCuelist(model);
  if (list === null || model.snapshot === null) {
    parts.push(`<div class="placeholder">waiting for snapshot</div>`);
    return `<div class="cuelist-panel">${parts.join("")}</div>`;
  }
  parts.push(renderTabs(model, list.name));
  if (model.snapshot.pointer < 0) {
    parts.push(`<div class="badge standby-badge">standby</div>`);
  }
  const pointer = model.snapshot.pointer;
  parts.push(
    ...list.ids.map((cueId, position) => renderCueRow(model, cueId, position === pointer)),
  );
  return `<div class="cuelist-panel">${parts.join("")}</div>`;
}
