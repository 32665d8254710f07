// Distance guidance for the group editor. The automatic linker chains lights
// within GROUP_LINK_RADIUS_M of each other; a hand-made group that is not
// chain-connected at that radius gets a non-blocking warning (the human may
// know better, e.g. lights across a wide intersection).

import type { Candidate } from './types.js';

export const GROUP_LINK_RADIUS_M = 20.0;

export function distanceMeters(a: [number, number, number], b: [number, number, number]): number {
  const dx = a[0] - b[0];
  const dy = a[1] - b[1];
  const dz = a[2] - b[2];
  return Math.sqrt(dx * dx + dy * dy + dz * dz);
}

export function maxPairwiseDistance(points: [number, number, number][]): number {
  let worst = 0;
  for (let i = 0; i < points.length; i++) {
    for (let j = i + 1; j < points.length; j++) {
      worst = Math.max(worst, distanceMeters(points[i]!, points[j]!));
    }
  }
  return worst;
}

export function isChainConnected(
  points: [number, number, number][],
  radius: number = GROUP_LINK_RADIUS_M,
): boolean {
  const n = points.length;
  if (n <= 1) return true;
  const seen = new Array<boolean>(n).fill(false);
  const queue = [0];
  seen[0] = true;
  let reached = 1;
  while (queue.length) {
    const i = queue.pop()!;
    for (let j = 0; j < n; j++) {
      if (!seen[j] && distanceMeters(points[i]!, points[j]!) <= radius) {
        seen[j] = true;
        reached++;
        queue.push(j);
      }
    }
  }
  return reached === n;
}

export interface GroupWarning {
  group: string;
  memberIds: string[];
  maxDistance: number;
}

/** Warnings for explicit groups whose members are not chain-connected
 * within the linking radius. Non-blocking: guidance, not a rule. */
export function groupWarnings(
  candidates: Candidate[],
  radius: number = GROUP_LINK_RADIUS_M,
): GroupWarning[] {
  const byGroup = new Map<string, Candidate[]>();
  for (const c of candidates) {
    if (c.status === 'accepted' && c.group) {
      const members = byGroup.get(c.group) ?? [];
      members.push(c);
      byGroup.set(c.group, members);
    }
  }
  const warnings: GroupWarning[] = [];
  for (const [group, members] of byGroup) {
    const points = members.map((m) => m.centroid);
    if (!isChainConnected(points, radius)) {
      warnings.push({
        group,
        memberIds: members.map((m) => m.id).sort(),
        maxDistance: maxPairwiseDistance(points),
      });
    }
  }
  return warnings.sort((a, b) => a.group.localeCompare(b.group));
}
