/** The function map: an SVG scatter of fragment-level functions.
 *
 * Positive functions draw as dots, negative as crosses, example-set
 * overlays as squares. Cluster boundaries are padded convex hulls; labels
 * follow the zoom level (super labels, then the clicked super's base
 * labels, then bare functions). Points are colored by cluster, or by
 * rating when the color-by-rating control is on.
 */

import { centroid, convexHull, hullPath, padHull, type Point } from "./hull.js";
import type { ViewState } from "./state.js";
import type { HierarchyDoc, MapPointDoc, OverlayPointDoc } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const CLUSTER_PALETTE = [
  "#4c78a8", "#f58518", "#54a24b", "#b279a2", "#e45756",
  "#72b7b2", "#eeca3b", "#ff9da6", "#9d755d", "#bab0ac",
];
const RATING_COLORS = { positive: "#2e9e4f", negative: "#e08a1e" } as const;
const NOISE_COLOR = "#b5b5b5";
const OVERLAY_ROLE_COLORS = { positive: "#2e9e4f", negative: "#e08a1e", excluded: "#6d6d6d" } as const;

export interface MapHandlers {
  onEnterSuper?(superId: string): void;
  onEnterBase?(baseId: string): void;
  onSelectFunction?(functionRef: string, addToBasket: boolean): void;
}

interface Scales {
  sx(x: number): number;
  sy(y: number): number;
}

function makeScales(points: MapPointDoc[], width: number, height: number): Scales {
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const pad = 0.08;
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  return {
    sx: (x) => ((x - minX) / spanX) * width * (1 - 2 * pad) + width * pad,
    sy: (y) => ((y - minY) / spanY) * height * (1 - 2 * pad) + height * pad,
  };
}

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

function glyph(
  rating: "positive" | "negative",
  x: number,
  y: number,
  color: string,
  size = 4,
): SVGElement {
  if (rating === "positive") {
    const dot = el("circle", { cx: `${x}`, cy: `${y}`, r: `${size}`, fill: color });
    dot.setAttribute("data-glyph", "dot");
    return dot;
  }
  const s = size;
  const cross = el("path", {
    d: `M${x - s},${y - s}L${x + s},${y + s}M${x - s},${y + s}L${x + s},${y - s}`,
    stroke: color,
    "stroke-width": "1.8",
    fill: "none",
  });
  cross.setAttribute("data-glyph", "cross");
  return cross;
}

/** Wheel zooms the viewBox around its center; dragging pans it. */
export function attachPanZoom(svg: SVGSVGElement): void {
  if (svg.getAttribute("data-panzoom") === "on") return;
  svg.setAttribute("data-panzoom", "on");
  const width = Number(svg.getAttribute("width") ?? 800);
  const height = Number(svg.getAttribute("height") ?? 600);

  const box = () => {
    const raw = svg.getAttribute("viewBox");
    if (!raw) return { x: 0, y: 0, w: width, h: height };
    const [x, y, w, h] = raw.split(/\s+/).map(Number);
    return { x: x!, y: y!, w: w!, h: h! };
  };
  const setBox = (x: number, y: number, w: number, h: number) =>
    svg.setAttribute("viewBox", `${x} ${y} ${w} ${h}`);

  svg.addEventListener("wheel", (event) => {
    event.preventDefault();
    const { x, y, w, h } = box();
    const factor = (event as WheelEvent).deltaY > 0 ? 1.15 : 1 / 1.15;
    const nw = Math.min(Math.max(w * factor, width / 16), width * 4);
    const nh = Math.min(Math.max(h * factor, height / 16), height * 4);
    setBox(x + (w - nw) / 2, y + (h - nh) / 2, nw, nh);
  });

  let dragging: { px: number; py: number } | null = null;
  svg.addEventListener("mousedown", (event) => {
    dragging = { px: (event as MouseEvent).clientX, py: (event as MouseEvent).clientY };
  });
  svg.addEventListener("mousemove", (event) => {
    if (!dragging) return;
    const { x, y, w, h } = box();
    const event_ = event as MouseEvent;
    const scale = w / width;
    setBox(
      x - (event_.clientX - dragging.px) * scale,
      y - (event_.clientY - dragging.py) * scale,
      w,
      h,
    );
    dragging = { px: event_.clientX, py: event_.clientY };
  });
  for (const end of ["mouseup", "mouseleave"]) {
    svg.addEventListener(end, () => (dragging = null));
  }
}

export function renderMap(
  svg: SVGSVGElement,
  hierarchy: HierarchyDoc | null,
  overlay: OverlayPointDoc[],
  state: ViewState,
  descriptions: Map<string, string>,
  handlers: MapHandlers = {},
): void {
  svg.textContent = "";
  const width = Number(svg.getAttribute("width") ?? 800);
  const height = Number(svg.getAttribute("height") ?? 600);
  attachPanZoom(svg);
  if (!svg.getAttribute("viewBox")) svg.setAttribute("viewBox", `0 0 ${width} ${height}`);

  if (!hierarchy || hierarchy.points.length === 0) {
    const message = el("text", {
      x: `${width / 2}`,
      y: `${height / 2}`,
      "text-anchor": "middle",
      fill: "#666",
    });
    message.setAttribute("data-role", "empty-message");
    message.textContent = "No functions to display for this criterion yet.";
    svg.appendChild(message);
    return;
  }

  const scales = makeScales(hierarchy.points, width, height);
  const baseOf = new Map<string, string>();
  for (const base of hierarchy.base_clusters) {
    for (const member of base.members) baseOf.set(member, base.base_id);
  }
  const superOf = new Map<string, string>();
  for (const superCluster of hierarchy.super_clusters) {
    for (const baseId of superCluster.members) superOf.set(baseId, superCluster.super_id);
  }
  const baseIndex = new Map(hierarchy.base_clusters.map((b, i) => [b.base_id, i]));
  const superIndex = new Map(hierarchy.super_clusters.map((s, i) => [s.super_id, i]));

  const clusterColor = (ref: string): string => {
    const baseId = baseOf.get(ref);
    if (baseId === undefined) return NOISE_COLOR;
    if (state.zoom === "super") {
      const superId = superOf.get(baseId);
      const index = superId !== undefined ? superIndex.get(superId) ?? 0 : 0;
      return CLUSTER_PALETTE[index % CLUSTER_PALETTE.length]!;
    }
    return CLUSTER_PALETTE[(baseIndex.get(baseId) ?? 0) % CLUSTER_PALETTE.length]!;
  };

  const focusBases =
    state.zoom === "base" && state.selectedSuperId
      ? new Set(
          hierarchy.super_clusters.find((s) => s.super_id === state.selectedSuperId)?.members ?? [],
        )
      : state.zoom === "function" && state.selectedBaseId
        ? new Set([state.selectedBaseId])
        : null;

  const hullLayer = el("g", { "data-layer": "hulls" });
  const pointLayer = el("g", { "data-layer": "points" });
  const labelLayer = el("g", { "data-layer": "labels" });
  svg.append(hullLayer, pointLayer, labelLayer);

  const screenPoints = new Map<string, Point>();
  for (const p of hierarchy.points) {
    screenPoints.set(p.function_ref, [scales.sx(p.x), scales.sy(p.y)]);
  }

  // cluster hulls: per super at the top level, per base below it
  const hullGroups: Array<{ id: string; kind: "super" | "base"; members: string[] }> = [];
  if (state.zoom === "super") {
    for (const superCluster of hierarchy.super_clusters) {
      const members = superCluster.members.flatMap(
        (baseId) => hierarchy.base_clusters.find((b) => b.base_id === baseId)?.members ?? [],
      );
      hullGroups.push({ id: superCluster.super_id, kind: "super", members });
    }
  } else {
    for (const base of hierarchy.base_clusters) {
      if (focusBases && !focusBases.has(base.base_id)) continue;
      hullGroups.push({ id: base.base_id, kind: "base", members: base.members });
    }
  }
  for (const group of hullGroups) {
    const pts = group.members
      .map((m) => screenPoints.get(m))
      .filter((p): p is Point => p !== undefined);
    if (pts.length < 3) continue;
    const index =
      group.kind === "super" ? superIndex.get(group.id) ?? 0 : baseIndex.get(group.id) ?? 0;
    const path = el("path", {
      d: hullPath(padHull(convexHull(pts), 10)),
      fill: CLUSTER_PALETTE[index % CLUSTER_PALETTE.length]!,
      "fill-opacity": "0.08",
      stroke: CLUSTER_PALETTE[index % CLUSTER_PALETTE.length]!,
      "stroke-opacity": "0.5",
    });
    path.setAttribute("data-role", "hull");
    path.setAttribute("data-cluster", group.id);
    hullLayer.appendChild(path);
  }

  // points
  for (const p of hierarchy.points) {
    const [x, y] = screenPoints.get(p.function_ref)!;
    const color = state.colorByRating ? RATING_COLORS[p.rating] : clusterColor(p.function_ref);
    const node = glyph(p.rating, x, y, color);
    node.setAttribute("data-role", "point");
    node.setAttribute("data-ref", p.function_ref);
    node.setAttribute("data-rating", p.rating);
    const baseId = baseOf.get(p.function_ref);
    if (baseId) node.setAttribute("data-base", baseId);
    if (focusBases && (!baseId || !focusBases.has(baseId))) {
      node.setAttribute("opacity", "0.25");
    }
    if (state.selectedFunctionId === p.function_ref || state.basket.includes(p.function_ref)) {
      node.setAttribute("data-selected", "true");
      node.setAttribute("stroke", "#222");
      node.setAttribute("stroke-width", "1.5");
    }
    const tooltip = el("title");
    tooltip.textContent = descriptions.get(p.function_ref) ?? p.function_ref;
    node.appendChild(tooltip);
    node.addEventListener("click", (event) => {
      handlers.onSelectFunction?.(p.function_ref, (event as MouseEvent).shiftKey);
    });
    pointLayer.appendChild(node);
  }

  // example-set overlay squares
  if (state.showExamples) {
    for (const p of overlay) {
      const x = scales.sx(p.x);
      const y = scales.sy(p.y);
      const square = el("rect", {
        x: `${x - 4.5}`,
        y: `${y - 4.5}`,
        width: "9",
        height: "9",
        fill: OVERLAY_ROLE_COLORS[p.role],
        stroke: "#222",
        "stroke-width": "0.8",
      });
      square.setAttribute("data-role", "overlay");
      square.setAttribute("data-ref", p.function_ref);
      square.setAttribute("data-example-role", p.role);
      const tooltip = el("title");
      tooltip.textContent = descriptions.get(p.function_ref) ?? p.function_ref;
      square.appendChild(tooltip);
      pointLayer.appendChild(square);
    }
  }

  // labels per zoom level
  const addLabel = (
    kind: "super-label" | "base-label",
    id: string,
    name: string,
    members: string[],
    onClick: (() => void) | undefined,
  ) => {
    const pts = members
      .map((m) => screenPoints.get(m))
      .filter((p): p is Point => p !== undefined);
    if (pts.length === 0) return;
    const [cx, cy] = centroid(pts);
    const label = el("text", {
      x: `${cx}`,
      y: `${cy}`,
      "text-anchor": "middle",
      "font-weight": "600",
      "paint-order": "stroke",
      stroke: "#fff",
      "stroke-width": "3",
    });
    label.setAttribute("data-role", kind);
    label.setAttribute("data-cluster", id);
    label.textContent = name;
    if (onClick) {
      label.addEventListener("click", onClick);
      label.setAttribute("cursor", "pointer");
    }
    labelLayer.appendChild(label);
  };

  if (state.zoom === "super" && state.showSuperLabels) {
    for (const superCluster of hierarchy.super_clusters) {
      const members = superCluster.members.flatMap(
        (baseId) => hierarchy.base_clusters.find((b) => b.base_id === baseId)?.members ?? [],
      );
      addLabel("super-label", superCluster.super_id, superCluster.name, members, () =>
        handlers.onEnterSuper?.(superCluster.super_id),
      );
    }
  }
  const labelAllBases = state.zoom === "super" && state.showBaseLabels;
  if (state.zoom === "base" || labelAllBases) {
    for (const base of hierarchy.base_clusters) {
      if (!labelAllBases && focusBases && !focusBases.has(base.base_id)) continue;
      addLabel("base-label", base.base_id, base.name, base.members, () =>
        handlers.onEnterBase?.(base.base_id),
      );
    }
  }
}
