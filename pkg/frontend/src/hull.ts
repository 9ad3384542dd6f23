/** Convex hulls for cluster boundaries: deterministic and cheap, rendered
 * with padding instead of density contours. */

export type Point = [number, number];

function cross(o: Point, a: Point, b: Point): number {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

/** Andrew's monotone chain; returns hull vertices in counter-clockwise order. */
export function convexHull(points: Point[]): Point[] {
  const sorted = [...points].sort((p, q) => p[0] - q[0] || p[1] - q[1]);
  const unique = sorted.filter(
    (p, i) => i === 0 || p[0] !== sorted[i - 1]![0] || p[1] !== sorted[i - 1]![1],
  );
  if (unique.length <= 2) return unique;

  const lower: Point[] = [];
  for (const p of unique) {
    while (lower.length >= 2 && cross(lower[lower.length - 2]!, lower[lower.length - 1]!, p) <= 0) {
      lower.pop();
    }
    lower.push(p);
  }
  const upper: Point[] = [];
  for (const p of [...unique].reverse()) {
    while (upper.length >= 2 && cross(upper[upper.length - 2]!, upper[upper.length - 1]!, p) <= 0) {
      upper.pop();
    }
    upper.push(p);
  }
  lower.pop();
  upper.pop();
  return lower.concat(upper);
}

export function centroid(points: Point[]): Point {
  let x = 0;
  let y = 0;
  for (const [px, py] of points) {
    x += px;
    y += py;
  }
  return [x / points.length, y / points.length];
}

/** Push hull vertices outward from the centroid by `pad` units. */
export function padHull(hull: Point[], pad: number): Point[] {
  if (hull.length === 0) return [];
  const [cx, cy] = centroid(hull);
  return hull.map(([x, y]) => {
    const dx = x - cx;
    const dy = y - cy;
    const norm = Math.hypot(dx, dy) || 1;
    return [x + (dx / norm) * pad, y + (dy / norm) * pad] as Point;
  });
}

export function hullPath(hull: Point[]): string {
  if (hull.length === 0) return "";
  const [first, ...rest] = hull;
  const moves = rest.map(([x, y]) => `L${x.toFixed(2)},${y.toFixed(2)}`).join("");
  return `M${first![0].toFixed(2)},${first![1].toFixed(2)}${moves}Z`;
}

/** Point-in-polygon (ray casting), used by tests as an independent check. */
export function insidePolygon(polygon: Point[], [x, y]: Point): boolean {
  let inside = false;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
    const [xi, yi] = polygon[i]!;
    const [xj, yj] = polygon[j]!;
    if (yi > y !== yj > y && x < ((xj - xi) * (y - yi)) / (yj - yi) + xi) {
      inside = !inside;
    }
  }
  return inside;
}
