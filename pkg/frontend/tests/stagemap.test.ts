import { describe, expect, it } from "vitest";

import { applyServerMessage, connectionChanged, initialModel } from "../src/model.js";
import type { ConsoleModel } from "../src/model.js";
import { renderStageMap } from "../src/stagemap.js";
import type { Snapshot } from "../src/types.js";
import { helloFixture, snapshotFixture } from "./fixtures.js";

function liveModel(overrides: Partial<Snapshot> = {}): ConsoleModel {
  let model = connectionChanged(initialModel(), "open");
  model = applyServerMessage(model, helloFixture());
  return applyServerMessage(model, snapshotFixture(overrides));
}

function translateOf(svg: string, dataId: string): string {
  const match = svg.match(
    new RegExp(`data-id="${dataId}"[^>]*transform="translate\\(([^)]+)\\)`),
  );
  expect(match, `marker ${dataId} has a position`).not.toBeNull();
  return match![1]!;
}

describe("renderStageMap", () => {
  it("renders one kind-coded marker per goal, with its id", () => {
    const svg = renderStageMap(liveModel());
    expect(svg).toMatch(/class="goal goal-avatar" data-id="GA_center"[^>]*>\s*<circle/);
    expect(svg).toMatch(/class="goal goal-prop" data-id="GP_table"[^>]*>\s*<rect/);
    expect(svg).toMatch(/class="goal goal-camera" data-id="GC_cam1"[^>]*>\s*<polygon/);
    expect(svg).toContain(">GA_left</text>");
  });

  it("an avatar standing on its goal coincides with the marker", () => {
    const svg = renderStageMap(liveModel());
    expect(translateOf(svg, "Avatar1")).toBe(translateOf(svg, "GA_center"));
  });

  it("an avatar off its goal does not coincide", () => {
    const svg = renderStageMap(
      liveModel({
        avatars: {
          ...snapshotFixture().avatars,
          Avatar1: {
            world: { pos: [3, 2, 0], yaw: 0 },
            visible: true,
            source: { mocap: "subject1" },
            clips: [],
          },
        },
      }),
    );
    expect(translateOf(svg, "Avatar1")).not.toBe(translateOf(svg, "GA_center"));
  });

  it("orients avatar arrows by yaw, negated for the flipped y axis", () => {
    const svg = renderStageMap(liveModel());
    const arrow = svg.match(/data-id="Avatar2"[^>]*>\s*<polygon[^>]*rotate\(([^)]+)\)/);
    expect(arrow).not.toBeNull();
    expect(arrow![1]).toBe("-30.0");
  });

  it("draws a tether from a dependent prop to its carrier", () => {
    const svg = renderStageMap(liveModel());
    const line = svg.match(
      /<line class="tether" data-id="Prop3" x1="([^"]+)" y1="([^"]+)" x2="([^"]+)" y2="([^"]+)"/,
    );
    expect(line).not.toBeNull();
    const [avatarX, avatarY] = translateOf(svg, "Avatar1").split(" ");
    expect(line![1]).toBe(avatarX);
    expect(line![2]).toBe(avatarY);
    const [propX, propY] = translateOf(svg, "Prop3").split(" ");
    expect(line![3]).toBe(propX);
    expect(line![4]).toBe(propY);
  });

  it("autonomous props get no tether", () => {
    const svg = renderStageMap(liveModel());
    expect(svg).not.toContain('class="tether" data-id="Prop1"');
  });

  it("camera fade level drives the disc, dark at zero", () => {
    const lit = renderStageMap(liveModel());
    expect(lit).toContain('class="camera" data-id="camera" data-fade="1"');
    expect(lit).toContain('fill-opacity="1"');
    const dark = renderStageMap(
      liveModel({
        camera: { world: { pos: [0, -6, 1.6], yaw: 90 }, attached_to: null, fade_level: 0 },
      }),
    );
    expect(dark).toContain('class="camera dark" data-id="camera" data-fade="0"');
    expect(dark).toContain('fill-opacity="0"');
  });

  it("dims cast that is hidden", () => {
    const base = snapshotFixture();
    const avatars = { ...base.avatars };
    avatars.Avatar2 = { ...avatars.Avatar2!, visible: false };
    const svg = renderStageMap(liveModel({ avatars }));
    expect(svg).toContain('class="avatar hidden-cast" data-id="Avatar2"');
    expect(svg).toContain('class="avatar" data-id="Avatar1"');
  });

  it("holds a fixed frame and a placeholder before the first snapshot", () => {
    const empty = renderStageMap(initialModel());
    expect(empty).toContain('viewBox="0 0 640 480"');
    expect(empty).toContain("no snapshot");
    const live = renderStageMap(liveModel());
    expect(live).toContain('viewBox="0 0 640 480"');
  });
});
