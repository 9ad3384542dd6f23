/** Thin typed client for the evaluation service. Every number shown in the
 * UI comes from these calls; the client never recomputes scores or counts. */

import type {
  ClusterFilterDoc,
  CriterionDoc,
  DatasetSummary,
  EvaluationDoc,
  ExampleMutation,
  HierarchyDoc,
  JobDoc,
  OverlayPointDoc,
  RecordDoc,
  RunMeta,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string = "/api/v1",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  listDatasets(): Promise<DatasetSummary[]> {
    return this.request("/datasets");
  }

  getDataset(datasetId: string): Promise<{ dataset_id: string; records: RecordDoc[] }> {
    return this.request(`/datasets/${encodeURIComponent(datasetId)}`);
  }

  listCriteria(): Promise<CriterionDoc[]> {
    return this.request("/criteria");
  }

  mutateExamples(criterionId: string, mutation: ExampleMutation): Promise<CriterionDoc> {
    return this.post(`/criteria/${encodeURIComponent(criterionId)}/examples`, mutation);
  }

  listRuns(): Promise<RunMeta[]> {
    return this.request("/runs");
  }

  startRun(payload: {
    dataset_id: string;
    seed?: number;
    criteria_ids?: string[];
    skip_clustering?: boolean;
  }): Promise<{ job_id: string }> {
    return this.post("/runs", payload);
  }

  jobStatus(jobId: string): Promise<JobDoc> {
    return this.request(`/jobs/${encodeURIComponent(jobId)}`);
  }

  evaluations(
    runId: string,
    filter: { record_id?: string; criterion_id?: string } = {},
  ): Promise<EvaluationDoc[]> {
    const params = new URLSearchParams();
    if (filter.record_id) params.set("record_id", filter.record_id);
    if (filter.criterion_id) params.set("criterion_id", filter.criterion_id);
    const query = params.toString();
    return this.request(`/runs/${encodeURIComponent(runId)}/evaluations${query ? `?${query}` : ""}`);
  }

  hierarchy(runId: string, criterionId: string): Promise<HierarchyDoc> {
    return this.request(
      `/runs/${encodeURIComponent(runId)}/hierarchy/${encodeURIComponent(criterionId)}`,
    );
  }

  clusterFilter(runId: string, baseId: string): Promise<ClusterFilterDoc> {
    return this.request(
      `/runs/${encodeURIComponent(runId)}/clusters/${encodeURIComponent(baseId)}/filter`,
    );
  }

  overlay(runId: string, criterionId: string): Promise<OverlayPointDoc[]> {
    return this.request(
      `/runs/${encodeURIComponent(runId)}/overlay/${encodeURIComponent(criterionId)}`,
    );
  }
}
