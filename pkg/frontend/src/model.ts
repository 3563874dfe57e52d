/**
 * Console state and its reducers.
 *
 * The model is snapshot-authoritative: it stores the latest hello and
 * snapshot verbatim and never extrapolates or predicts.  Sending a command
 * changes nothing except the command log; the view moves only when a new
 * snapshot confirms the change.  All reducers return fresh objects so the
 * render layer can compare by reference.
 */

import type { Command, Hello, ServerMessage, Snapshot } from "./types.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export type LogEntry = {
  at: number;
  text: string;
  failed: boolean;
};

export type ConsoleModel = {
  connection: ConnectionStatus;
  hello: Hello | null;
  snapshot: Snapshot | null;
  log: LogEntry[];
  toast: string | null;
};

const LOG_LIMIT = 50;

export function initialModel(): ConsoleModel {
  return { connection: "connecting", hello: null, snapshot: null, log: [], toast: null };
}

export function connectionChanged(model: ConsoleModel, status: ConnectionStatus): ConsoleModel {
  return { ...model, connection: status };
}

export function applyServerMessage(model: ConsoleModel, message: ServerMessage): ConsoleModel {
  if (message.type === "hello") {
    return { ...model, hello: message };
  }
  return { ...model, snapshot: message };
}

export function commandSent(model: ConsoleModel, command: Command, at: number): ConsoleModel {
  const entry: LogEntry = { at, text: describeCommand(command), failed: false };
  return { ...model, log: [...model.log, entry].slice(-LOG_LIMIT) };
}

export function sendFailed(model: ConsoleModel, command: Command, at: number): ConsoleModel {
  const text = `${describeCommand(command)} (send failed)`;
  const entry: LogEntry = { at, text, failed: true };
  return {
    ...model,
    log: [...model.log, entry].slice(-LOG_LIMIT),
    toast: `command not sent: ${describeCommand(command)}`,
  };
}

export function clearToast(model: ConsoleModel): ConsoleModel {
  return { ...model, toast: null };
}

export function describeCommand(command: Command): string {
  switch (command.cmd) {
    case "go":
      return "GO";
    case "goback":
      return "GOBACK";
    case "select":
      return command.name === null ? "select next cuelist" : `select ${command.name}`;
    case "bypass":
      return `bypass ${command.cue ?? "current"}:${command.set} ${command.mode}`;
    case "nudge":
      return `nudge ${command.target} (${command.dx}, ${command.dy})`;
    case "rotate":
      return `rotate ${command.target} ${command.degrees}`;
    case "fader":
      return `fader ${command.path} = ${command.value}`;
  }
}

/**
 * Map a clicked control's data attributes onto a protocol command.
 *
 * Every actionable element in the rendered views carries data-cmd plus the
 * command's parameters.  Two clicks produce two commands; there is no
 * debouncing here, boundary errors are the engine's to report.
 */
export function commandFromDataset(
  dataset: Record<string, string | undefined>,
): Command | null {
  switch (dataset.cmd) {
    case "go":
      return { cmd: "go" };
    case "goback":
      return { cmd: "goback" };
    case "select":
      return { cmd: "select", name: dataset.name ?? null };
    case "bypass": {
      if (dataset.cue === undefined || dataset.set === undefined) return null;
      return {
        cmd: "bypass",
        cue: Number(dataset.cue),
        set: Number(dataset.set),
        mode: "toggle",
      };
    }
    default:
      return null;
  }
}

/** Cue ids of the snapshot's active cuelist, in playback order. */
export function activeCuelist(model: ConsoleModel): { name: string; ids: number[] } | null {
  if (model.hello === null || model.snapshot === null) return null;
  const name = model.snapshot.cuelist;
  const ids = model.hello.cuelists[name];
  if (ids === undefined) return null;
  return { name, ids };
}

/**
 * The bypass flag a set currently runs with: the live override when one
 * exists, the cuesheet default otherwise.  The snapshot only carries
 * overrides that differ from the document.
 */
export function effectiveBypass(model: ConsoleModel, cueId: number, setIndex: number): boolean {
  const override = model.snapshot?.bypass[`${cueId}:${setIndex}`];
  if (override !== undefined) return override;
  const fallback = model.hello?.cues[String(cueId)]?.sets[setIndex]?.bypass;
  return fallback ?? false;
}
