/**
 * Top-down stage map renderer.
 *
 * Projects the level's goal markers and the live cast onto a fixed-size
 * SVG, looking down the world +Z axis: screen x is world x, screen y is
 * world y flipped.  Goals are kind-coded shapes, avatars are arrows
 * oriented by yaw, dependent props are tethered to their carrier, the
 * camera carries a fade disc that goes dark at level 0.  Everything is
 * drawn from the latest snapshot only.
 */

import type { ConsoleModel } from "./model.js";
import { escapeHtml } from "./cuelist.js";
import type { GoalKind, PoseJson } from "./types.js";

const WIDTH = 640;
const HEIGHT = 480;
const MARGIN = 40;

type Point = { x: number; y: number };

type Projector = (p: Point) => Point;

function fmt(value: number): string {
  return value.toFixed(1);
}

function worldPoint(pose: PoseJson): Point {
  return { x: pose.pos[0], y: pose.pos[1] };
}

function makeProjector(points: Point[]): Projector {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const p of points) {
    minX = Math.min(minX, p.x);
    maxX = Math.max(maxX, p.x);
    minY = Math.min(minY, p.y);
    maxY = Math.max(maxY, p.y);
  }
  if (points.length === 0) {
    minX = -1;
    maxX = 1;
    minY = -1;
    maxY = 1;
  }
  // breathing room so markers at the hull are not clipped
  minX -= 1;
  maxX += 1;
  minY -= 1;
  maxY += 1;
  const scale = Math.min((WIDTH - 2 * MARGIN) / (maxX - minX), (HEIGHT - 2 * MARGIN) / (maxY - minY));
  const offsetX = (WIDTH - (maxX - minX) * scale) / 2;
  const offsetY = (HEIGHT - (maxY - minY) * scale) / 2;
  return (p) => ({
    x: offsetX + (p.x - minX) * scale,
    y: offsetY + (maxY - p.y) * scale,
  });
}

function goalShape(kind: GoalKind): string {
  switch (kind) {
    case "avatar":
      return `<circle class="shape" r="10"/>`;
    case "prop":
      return `<rect class="shape" x="-8" y="-8" width="16" height="16"/>`;
    case "camera":
      return `<polygon class="shape" points="0,-10 9,8 -9,8"/>`;
  }
}

function tag(label: string, dy = 24): string {
  return `<text class="tag" x="0" y="${dy}">${escapeHtml(label)}</text>`;
}

export function renderStageMap(model: ConsoleModel): string {
  const hello = model.hello;
  const snapshot = model.snapshot;
  const open = `<svg class="stage-map" viewBox="0 0 ${WIDTH} ${HEIGHT}" xmlns="http://www.w3.org/2000/svg">`;
  if (hello === null || snapshot === null) {
    return `${open}<text class="placeholder" x="${WIDTH / 2}" y="${HEIGHT / 2}">no snapshot</text></svg>`;
  }

  const points: Point[] = hello.level.goals.map((g) => ({ x: g.pos[0], y: g.pos[1] }));
  for (const avatar of Object.values(snapshot.avatars)) points.push(worldPoint(avatar.world));
  for (const prop of Object.values(snapshot.props)) points.push(worldPoint(prop.world));
  points.push(worldPoint(snapshot.camera.world));
  const project = makeProjector(points);

  const parts: string[] = [open];

  // tethers under everything else
  for (const [id, prop] of Object.entries(snapshot.props)) {
    if (prop.attached_to === null) continue;
    const carrier = snapshot.avatars[prop.attached_to.avatar];
    if (carrier === undefined) continue;
    const a = project(worldPoint(carrier.world));
    const b = project(worldPoint(prop.world));
    parts.push(
      `<line class="tether" data-id="${escapeHtml(id)}" x1="${fmt(a.x)}" y1="${fmt(a.y)}" x2="${fmt(b.x)}" y2="${fmt(b.y)}"/>`,
    );
  }

  for (const goal of hello.level.goals) {
    const p = project({ x: goal.pos[0], y: goal.pos[1] });
    parts.push(
      `<g class="goal goal-${goal.kind}" data-id="${escapeHtml(goal.id)}" transform="translate(${fmt(p.x)} ${fmt(p.y)})">`,
      goalShape(goal.kind),
      tag(goal.id),
      `</g>`,
    );
  }

  for (const [id, prop] of Object.entries(snapshot.props)) {
    const p = project(worldPoint(prop.world));
    const cls = prop.visible ? "prop" : "prop hidden-cast";
    parts.push(
      `<g class="${cls}" data-id="${escapeHtml(id)}" transform="translate(${fmt(p.x)} ${fmt(p.y)})">`,
      `<rect class="shape" x="-5" y="-5" width="10" height="10" transform="rotate(45)"/>`,
      tag(id, 18),
      `</g>`,
    );
  }

  for (const [id, avatar] of Object.entries(snapshot.avatars)) {
    const p = project(worldPoint(avatar.world));
    const cls = avatar.visible ? "avatar" : "avatar hidden-cast";
    // world yaw is counter-clockwise, screen y points down, so negate
    parts.push(
      `<g class="${cls}" data-id="${escapeHtml(id)}" transform="translate(${fmt(p.x)} ${fmt(p.y)})">`,
      `<polygon class="arrow" points="14,0 -9,8 -5,0 -9,-8" transform="rotate(${fmt(-avatar.world.yaw)})"/>`,
      tag(id),
      `</g>`,
    );
  }

  {
    const fade = snapshot.camera.fade_level;
    const p = project(worldPoint(snapshot.camera.world));
    const cls = fade === 0 ? "camera dark" : "camera";
    parts.push(
      `<g class="${cls}" data-id="camera" data-fade="${fade}" transform="translate(${fmt(p.x)} ${fmt(p.y)})">`,
      `<polygon class="wedge" points="0,0 22,-9 22,9" transform="rotate(${fmt(-snapshot.camera.world.yaw)})"/>`,
      `<circle class="fade-disc" r="7" fill-opacity="${fade}"/>`,
      tag("camera"),
      `</g>`,
    );
  }

  parts.push(`</svg>`);
  return parts.join("");
}
