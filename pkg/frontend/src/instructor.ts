// Instructor review: list the unrecognized clusters of an exercise and push a
// manual verdict per cluster. The UI reflects server-confirmed state only:
// after a classification it re-fetches the list instead of mutating locally.

import type { CfgeqClient, ClusterInfo } from "./api.js";

export interface ClusterCard {
  id: string;
  representative: string;
  memberCount: number;
}

export function reviewableCards(clusters: ClusterInfo[]): ClusterCard[] {
  return clusters
    .filter((c) => c.kind === "unrecognized")
    .map((c) => ({ id: c.id, representative: c.representative, memberCount: c.member_count }));
}

export async function loadReview(client: CfgeqClient, exerciseId: string): Promise<ClusterCard[]> {
  const { clusters } = await client.getClusters(exerciseId);
  return reviewableCards(clusters);
}

export async function classifyAndRefresh(
  client: CfgeqClient,
  exerciseId: string,
  clusterId: string,
  verdict: "equivalent" | "not_equivalent",
  rationale: string,
): Promise<ClusterCard[]> {
  await client.classifyCluster(clusterId, verdict, rationale);
  return loadReview(client, exerciseId);
}
