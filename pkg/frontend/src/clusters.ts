/**
 * Read-only cluster inspector: which students group together for a given k.
 */

import { ApiError, PvtaApi } from "./api.js";

export interface ClusterRow {
  cluster: number;
  students: string[];
}

export interface ClusterInspectorState {
  token: string;
  k: number;
  seed: number;
  rows: ClusterRow[];
  inertia: number | null;
  error: string | null;
}

/** Group the assignment map into per-cluster rows, both levels sorted. */
export function toRows(assignments: Record<string, number>): ClusterRow[] {
  const byCluster = new Map<number, string[]>();
  for (const [student, cluster] of Object.entries(assignments)) {
    const members = byCluster.get(cluster) ?? [];
    members.push(student);
    byCluster.set(cluster, members);
  }
  return [...byCluster.entries()]
    .map(([cluster, students]) => ({ cluster, students: students.sort() }))
    .sort((a, b) => a.cluster - b.cluster);
}

export class ClusterInspector {
  readonly state: ClusterInspectorState;

  constructor(
    private readonly api: PvtaApi,
    token: string,
  ) {
    this.state = {
      token,
      k: 2,
      seed: 42,
      rows: [],
      inertia: null,
      error: null,
    };
  }

  async load(k: number, seed: number): Promise<void> {
    this.state.k = k;
    this.state.seed = seed;
    try {
      const view = await this.api.clusters(k, seed, this.state.token);
      this.state.rows = toRows(view.assignments);
      this.state.inertia = view.inertia;
      this.state.error = null;
    } catch (error) {
      this.state.rows = [];
      this.state.inertia = null;
      this.state.error =
        error instanceof ApiError ? error.code : "network_error";
    }
  }
}
