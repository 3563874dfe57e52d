/** Hand-built hello/snapshot literals shaped like the engine's broadcast. */

import type { Hello, Snapshot } from "../src/types.js";

export function helloFixture(): Hello {
  return {
    type: "hello",
    level: {
      name: "black-box-stage",
      goals: [
        { id: "GC_cam1", kind: "camera", pos: [0, -6, 1.6], yaw: 90 },
        { id: "GA_center", kind: "avatar", pos: [0, 0, 0], yaw: 0 },
        { id: "GA_left", kind: "avatar", pos: [-2, 0.5, 0], yaw: 30 },
        { id: "GP_table", kind: "prop", pos: [1.5, 0.5, 0.9], yaw: 0 },
      ],
    },
    cuelists: { Main: [10, 20, 30], Encore: [20, 30] },
    cues: {
      "10": {
        label: "places",
        sets: [
          { type: "camera", bypass: false },
          { type: "avatar", bypass: false, target: "Avatar1" },
          { type: "prop", bypass: false, target: "Prop2" },
        ],
      },
      "20": {
        label: "second entrance",
        sets: [
          { type: "avatar", bypass: false, target: "Avatar2" },
          { type: "prop", bypass: false, target: "Prop1" },
          { type: "osc", bypass: false },
        ],
      },
      "30": {
        label: "finale",
        sets: [
          { type: "sequence", bypass: false },
          { type: "prop", bypass: false, target: "Prop3" },
          { type: "camera", bypass: false },
          { type: "osc", bypass: true },
        ],
      },
    },
    cast: {
      avatars: [
        { id: "Avatar1", appearance: "dancer", source: { mocap: "subject1" } },
        { id: "Avatar2", appearance: "narrator", source: "player" },
      ],
      props: [
        { id: "Prop1", kind: "mesh" },
        { id: "Prop2", kind: "light" },
        { id: "Prop3", kind: "mesh" },
      ],
      cameras: ["CineCamera"],
    },
  };
}

export function snapshotFixture(overrides: Partial<Snapshot> = {}): Snapshot {
  return {
    type: "snapshot",
    tick: 120,
    time: 2.0,
    cuelist: "Main",
    pointer: 0,
    cue: 10,
    bypass: {},
    avatars: {
      Avatar1: {
        world: { pos: [0, 0, 0], yaw: 0 },
        visible: true,
        source: { mocap: "subject1" },
        clips: [],
      },
      Avatar2: {
        world: { pos: [-2, 0.5, 0], yaw: 30 },
        visible: true,
        source: "player",
        clips: [["breathing", 1]],
      },
    },
    props: {
      Prop1: {
        world: { pos: [1.5, 0.5, 0.9], yaw: 0 },
        attached_to: null,
        visible: true,
        light: null,
        audio_playing: false,
      },
      Prop3: {
        world: { pos: [0.3, 0, 1.4], yaw: 0 },
        attached_to: { avatar: "Avatar1", socket: "left_arm" },
        visible: true,
        light: null,
        audio_playing: false,
      },
    },
    camera: {
      world: { pos: [0, -6, 1.6], yaw: 90 },
      attached_to: null,
      fade_level: 1,
    },
    sequences: [],
    effects: [],
    state_hash: "abc123",
    ...overrides,
  };
}
