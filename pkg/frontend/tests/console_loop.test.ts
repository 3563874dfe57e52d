/**
 * Console loop against a live engine.
 *
 * Spawns the real service on ephemeral ports, connects like the browser
 * does and drives the operator surface end to end: GO moves the
 * highlighted cue within a snapshot interval, bypass toggles round-trip
 * through the broadcast, and the stage map shows the avatar sitting on
 * its goal once an avatar cue fired.  The model/view code under test is
 * exactly what main.ts wires into the page.
 */

import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import { createInterface } from "node:readline";
import path from "node:path";
import { fileURLToPath } from "node:url";
import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { renderCuelist } from "../src/cuelist.js";
import {
  applyServerMessage,
  commandFromDataset,
  commandSent,
  connectionChanged,
  initialModel,
  type ConsoleModel,
} from "../src/model.js";
import { renderStageMap } from "../src/stagemap.js";
import { parseServerMessage, type Snapshot } from "../src/types.js";

const repoRoot = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..", "..");

let engine: ChildProcessWithoutNullStreams;
let engineStderr = "";
let socket: WebSocket;
let model: ConsoleModel = initialModel();

type Waiter = { pass: (s: Snapshot) => boolean; resolve: (s: Snapshot) => void };
const waiters: Waiter[] = [];

function onFrame(text: string): void {
  model = applyServerMessage(model, parseServerMessage(text));
  const snapshot = model.snapshot;
  if (snapshot === null) return;
  for (let i = waiters.length - 1; i >= 0; i--) {
    if (waiters[i]!.pass(snapshot)) {
      const [waiter] = waiters.splice(i, 1);
      waiter!.resolve(snapshot);
    }
  }
}

function nextSnapshot(
  pass: (s: Snapshot) => boolean,
  label: string,
  timeoutMs = 5000,
): Promise<Snapshot> {
  return new Promise((resolve, reject) => {
    const current = model.snapshot;
    if (current !== null && pass(current)) {
      resolve(current);
      return;
    }
    const timer = setTimeout(
      () => reject(new Error(`timed out waiting for ${label}`)),
      timeoutMs,
    );
    waiters.push({
      pass,
      resolve: (s) => {
        clearTimeout(timer);
        resolve(s);
      },
    });
  });
}

/** What a click on a rendered control does in main.ts, minus the DOM. */
function click(dataset: Record<string, string>): void {
  const command = commandFromDataset(dataset);
  if (command === null) throw new Error(`not a control: ${JSON.stringify(dataset)}`);
  socket.send(JSON.stringify(command));
  model = commandSent(model, command, Date.now());
}

function startEngine(): Promise<string> {
  engine = spawn(
    "python3",
    [
      "-m",
      "regie.netio.cli",
      "run",
      "--level",
      "fixtures/figure4.level.json",
      "--cuesheet",
      "fixtures/figure4.cue.json",
      "--clips",
      "fixtures/clips.json",
      "--serve",
      "127.0.0.1:0",
      "--mocap",
      "udp://127.0.0.1:0",
      "--osc-in",
      "udp://127.0.0.1:0",
    ],
    {
      cwd: repoRoot,
      env: {
        ...process.env,
        PYTHONUNBUFFERED: "1",
        PYTHONPATH: path.join(repoRoot, "src"),
      },
    },
  );
  engine.stderr.on("data", (chunk: Buffer) => {
    engineStderr += chunk.toString();
  });
  return new Promise((resolve, reject) => {
    const lines = createInterface({ input: engine.stdout });
    lines.on("line", (line) => {
      const match = line.match(/^listening serve ws:\/\/(\S+)$/);
      if (match !== null) resolve(`ws://${match[1]}`);
    });
    engine.on("exit", (code) =>
      reject(new Error(`engine exited early (code ${code}): ${engineStderr}`)),
    );
    setTimeout(() => reject(new Error(`engine never announced: ${engineStderr}`)), 15_000);
  });
}

describe("console loop against a live engine", () => {
  beforeAll(async () => {
    const url = await startEngine();
    socket = new WebSocket(url);
    socket.onmessage = (event) => onFrame(String(event.data));
    await new Promise<void>((resolve, reject) => {
      socket.onopen = () => resolve();
      socket.onerror = (err) => reject(err);
    });
    model = connectionChanged(model, "open");
    await nextSnapshot(() => true, "the first broadcast");
  });

  afterAll(async () => {
    socket?.close();
    if (engine !== undefined && engine.exitCode === null) {
      engine.kill();
      await new Promise((resolve) => engine.on("exit", resolve));
    }
  });

  it("greets with the show structure and a standby cuelist", () => {
    expect(model.hello?.level.name).toBe("black-box-stage");
    expect(model.hello?.cuelists["Main"]).toEqual([10, 20, 30]);
    expect(model.snapshot?.pointer).toBe(-1);
    const html = renderCuelist(model);
    expect(html).toContain("standby");
    expect(html).not.toContain('class="cue current"');
  });

  it("GO advances the highlighted cue within one snapshot interval", async () => {
    // sync to a fresh broadcast so the tick budget below is honest
    const base = model.snapshot!.tick;
    const before = await nextSnapshot((s) => s.tick > base, "a fresh tick");
    click({ cmd: "go" });
    const confirm = await nextSnapshot((s) => s.pointer === 0, "pointer on cue 10");
    expect(confirm.cue).toBe(10);
    // consumed on the tick after it lands, plus at most one broadcast in flight
    expect(confirm.tick - before.tick).toBeLessThanOrEqual(3);
    const html = renderCuelist(model);
    expect(html).toMatch(/<details class="cue current"[^>]*data-cue="10"/);
    expect(html).not.toMatch(/<details class="cue current"[^>]*data-cue="20"/);
  });

  it("bypass toggles round-trip through the broadcast", async () => {
    expect(renderCuelist(model)).toContain('class="set" data-cue="10" data-set="1"');
    click({ cmd: "bypass", cue: "10", set: "1" });
    await nextSnapshot((s) => s.bypass["10:1"] === true, "override set");
    expect(renderCuelist(model)).toContain('class="set bypassed" data-cue="10" data-set="1"');
    click({ cmd: "bypass", cue: "10", set: "1" });
    // toggling back to the cuesheet default drops the override entirely
    await nextSnapshot((s) => s.bypass["10:1"] === undefined, "override cleared");
    expect(renderCuelist(model)).toContain('class="set" data-cue="10" data-set="1"');
  });

  it("stage map shows the avatar sitting on its goal after an avatar cue", async () => {
    const snapshot = await nextSnapshot((s) => s.pointer === 0, "cue 10 applied");
    const goal = model.hello!.level.goals.find((g) => g.id === "GA_center")!;
    const world = snapshot.avatars["Avatar1"]!.world;
    expect(world.pos[0]).toBeCloseTo(goal.pos[0], 9);
    expect(world.pos[1]).toBeCloseTo(goal.pos[1], 9);
    expect(world.yaw).toBeCloseTo(goal.yaw, 9);
    const svg = renderStageMap(model);
    const place = (id: string) =>
      svg.match(new RegExp(`data-id="${id}"[^>]*transform="translate\\(([^)]+)\\)`))?.[1];
    expect(place("Avatar1")).toBeDefined();
    expect(place("Avatar1")).toBe(place("GA_center"));
  });

  it("boundary errors pass through: GOBACK below the first cue changes nothing", async () => {
    const settled = await nextSnapshot((s) => s.pointer === 0, "settled on cue 10");
    click({ cmd: "goback" });
    await nextSnapshot((s) => s.pointer === -1, "back to standby");
    click({ cmd: "goback" });
    // rejected at the boundary; the stream keeps flowing with nothing moved
    const later = await nextSnapshot(
      (s) => s.tick > settled.tick + 30,
      "half a second of broadcasts",
    );
    expect(later.pointer).toBe(-1);
    expect(renderCuelist(model)).toContain("standby");
  });
});
