/**
 * Wire types for the console <-> engine JSON protocol.
 *
 * The engine speaks exactly two server-to-client message kinds: a one-time
 * "hello" describing the show structure, then a "snapshot" per tick with the
 * resolved world state.  Client-to-server messages are flat command objects.
 * These shapes mirror the engine's canonical JSON field for field; the
 * console has no other channel into the show.
 */

export type Vec3Json = [number, number, number];

export type PoseJson = {
  pos: Vec3Json;
  yaw: number;
};

export type GoalKind = "avatar" | "prop" | "camera";

export type GoalJson = {
  id: string;
  kind: GoalKind;
  pos: Vec3Json;
  yaw: number;
};

export type SetSummary = {
  type: "avatar" | "prop" | "camera" | "sequence" | "osc";
  bypass: boolean;
  target?: string;
};

export type CueSummary = {
  label: string;
  sets: SetSummary[];
};

export type AvatarSource = { mocap: string } | "player";

export type Hello = {
  type: "hello";
  level: {
    name: string;
    goals: GoalJson[];
  };
  cuelists: Record<string, number[]>;
  cues: Record<string, CueSummary>;
  cast: {
    avatars: { id: string; appearance: string; source: AvatarSource }[];
    props: { id: string; kind: string }[];
    cameras: string[];
  };
};

export type Attachment = { avatar: string; socket: string } | null;

export type AvatarState = {
  world: PoseJson;
  visible: boolean;
  source: AvatarSource;
  clips: [string, number][];
};

export type PropState = {
  world: PoseJson;
  attached_to: Attachment;
  visible: boolean;
  light: { intensity: number; color: number[] } | null;
  audio_playing: boolean;
};

export type CameraState = {
  world: PoseJson;
  attached_to: Attachment;
  fade_level: number;
};

export type SequenceState = {
  sequence: string;
  frame: number;
  start_frame: number;
  end_frame: number;
  rate: number;
};

export type EffectEntry = {
  tick: number;
  kind: string;
  [field: string]: unknown;
};

export type Snapshot = {
  type: "snapshot";
  tick: number;
  time: number;
  cuelist: string;
  pointer: number;
  cue: number | null;
  bypass: Record<string, boolean>;
  avatars: Record<string, AvatarState>;
  props: Record<string, PropState>;
  camera: CameraState;
  sequences: SequenceState[];
  effects: EffectEntry[];
  state_hash: string;
};

export type ServerMessage = Hello | Snapshot;

export type BypassMode = "on" | "off" | "toggle";

export type Command =
  | { cmd: "go" }
  | { cmd: "goback" }
  | { cmd: "select"; name: string | null }
  | { cmd: "bypass"; cue: number | null; set: number; mode: BypassMode }
  | { cmd: "nudge"; target: string; dx: number; dy: number }
  | { cmd: "rotate"; target: string; degrees: number }
  | { cmd: "fader"; path: string; value: number };

/** Parse one server frame; throws on anything that is not hello or snapshot. */
export function parseServerMessage(text: string): ServerMessage {
  const data: unknown = JSON.parse(text);
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    throw new Error("server message must be an object");
  }
  const kind = (data as { type?: unknown }).type;
  if (kind === "hello") {
    const hello = data as Hello;
    if (typeof hello.level !== "object" || typeof hello.cues !== "object") {
      throw new Error("malformed hello");
    }
    return hello;
  }
  if (kind === "snapshot") {
    const snap = data as Snapshot;
    if (typeof snap.tick !== "number" || typeof snap.pointer !== "number") {
      throw new Error("malformed snapshot");
    }
    return snap;
  }
  throw new Error(`unknown server message type ${String(kind)}`);
}
