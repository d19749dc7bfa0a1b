// Client-local node placement. Positions are presentation state only:
// they are computed from the document plus a fixed seed and are never
// written back to the server, so the interchange format stays causal.

export interface Point {
  x: number;
  y: number;
}

export interface LayoutOptions {
  seed: number;
  width?: number;
  height?: number;
  iterations?: number;
}

/** Deterministic 32-bit PRNG so layouts replay exactly for a given seed. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * Force-directed placement: pairwise repulsion, spring attraction along
 * edges, and a mild pull to the center, annealed over a fixed number of
 * rounds. Pure: the same nodes, edges, and seed give the same positions.
 */
export function forceLayout(
  nodeIds: number[],
  edges: { source: number; target: number }[],
  options: LayoutOptions,
): Map<number, Point> {
  const width = options.width ?? 800;
  const height = options.height ?? 600;
  const iterations = options.iterations ?? 150;
  const positions = new Map<number, Point>();
  if (nodeIds.length === 0) {
    return positions;
  }

  const rand = mulberry32(options.seed);
  const ids = [...nodeIds].sort((a, b) => a - b);
  for (const id of ids) {
    positions.set(id, {
      x: width * (0.2 + 0.6 * rand()),
      y: height * (0.2 + 0.6 * rand()),
    });
  }
  if (ids.length === 1) {
    positions.set(ids[0]!, { x: width / 2, y: height / 2 });
    return positions;
  }

  // Self-loops and repeated lags add no geometric information.
  const linkKeys = new Set<string>();
  const links: [number, number][] = [];
  for (const edge of edges) {
    if (edge.source === edge.target) {
      continue;
    }
    const key =
      edge.source < edge.target
        ? `${edge.source}:${edge.target}`
        : `${edge.target}:${edge.source}`;
    if (!linkKeys.has(key) && positions.has(edge.source) && positions.has(edge.target)) {
      linkKeys.add(key);
      links.push([edge.source, edge.target]);
    }
  }

  const area = width * height;
  const ideal = Math.sqrt(area / ids.length) * 0.8;
  let temperature = Math.min(width, height) / 8;
  const cooling = temperature / (iterations + 1);

  for (let round = 0; round < iterations; round += 1) {
    const forces = new Map<number, Point>();
    for (const id of ids) {
      forces.set(id, { x: 0, y: 0 });
    }

    for (let i = 0; i < ids.length; i += 1) {
      for (let j = i + 1; j < ids.length; j += 1) {
        const a = positions.get(ids[i]!)!;
        const b = positions.get(ids[j]!)!;
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        let dist = Math.hypot(dx, dy);
        if (dist < 1e-6) {
          // Deterministic nudge for coincident nodes.
          dx = 0.01 * (i - j);
          dy = 0.01;
          dist = Math.hypot(dx, dy);
        }
        const push = (ideal * ideal) / dist;
        const fa = forces.get(ids[i]!)!;
        const fb = forces.get(ids[j]!)!;
        fa.x += (dx / dist) * push;
        fa.y += (dy / dist) * push;
        fb.x -= (dx / dist) * push;
        fb.y -= (dy / dist) * push;
      }
    }

    for (const [source, target] of links) {
      const a = positions.get(source)!;
      const b = positions.get(target)!;
      const dx = a.x - b.x;
      const dy = a.y - b.y;
      const dist = Math.max(Math.hypot(dx, dy), 1e-6);
      const pull = (dist * dist) / ideal;
      const fa = forces.get(source)!;
      const fb = forces.get(target)!;
      fa.x -= (dx / dist) * pull;
      fa.y -= (dy / dist) * pull;
      fb.x += (dx / dist) * pull;
      fb.y += (dy / dist) * pull;
    }

    for (const id of ids) {
      const pos = positions.get(id)!;
      const force = forces.get(id)!;
      force.x += (width / 2 - pos.x) * 0.02;
      force.y += (height / 2 - pos.y) * 0.02;
      const magnitude = Math.max(Math.hypot(force.x, force.y), 1e-6);
      const step = Math.min(magnitude, temperature);
      pos.x += (force.x / magnitude) * step;
      pos.y += (force.y / magnitude) * step;
      pos.x = Math.min(width - 40, Math.max(40, pos.x));
      pos.y = Math.min(height - 40, Math.max(40, pos.y));
    }
    temperature = Math.max(temperature - cooling, 0.5);
  }

  for (const id of ids) {
    const pos = positions.get(id)!;
    positions.set(id, { x: Math.round(pos.x * 100) / 100, y: Math.round(pos.y * 100) / 100 });
  }
  return positions;
}
