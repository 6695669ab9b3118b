/** Derive the partition panel's cluster cards from a trial's class→cluster
 * assignment and the call graph.  Display data only — selection authority
 * stays with the service.
 */

import type { GraphPayload, PartitionPayload } from "./types.js";

export interface ClusterCard {
  cluster: number;
  classes: string[];
  size: number;
  /** call-graph edges with exactly one endpoint inside this cluster */
  crossEdges: number;
}

export interface ClusterSummary {
  cards: ClusterCard[];
  totalEdges: number;
  /** edges whose endpoints land in different clusters */
  crossingEdges: number;
}

export function clusterCards(
  partition: PartitionPayload,
  graph: GraphPayload,
): ClusterSummary {
  const members = new Map<number, string[]>();
  for (let cluster = 0; cluster < partition.k; cluster += 1) {
    members.set(cluster, []);
  }
  for (const [cls, cluster] of Object.entries(partition.assignment)) {
    let list = members.get(cluster);
    if (list === undefined) {
      list = [];
      members.set(cluster, list);
    }
    list.push(cls);
  }

  const crossCount = new Map<number, number>();
  let crossingEdges = 0;
  for (const [caller, callee] of graph.edges) {
    const a = partition.assignment[caller];
    const b = partition.assignment[callee];
    if (a === undefined || b === undefined || a === b) continue;
    crossingEdges += 1;
    crossCount.set(a, (crossCount.get(a) ?? 0) + 1);
    crossCount.set(b, (crossCount.get(b) ?? 0) + 1);
  }

  const cards = [...members.entries()]
    .sort(([a], [b]) => a - b)
    .map(([cluster, classes]) => ({
      cluster,
      classes: [...classes].sort(),
      size: classes.length,
      crossEdges: crossCount.get(cluster) ?? 0,
    }));
  return { cards, totalEdges: graph.edges.length, crossingEdges };
}
