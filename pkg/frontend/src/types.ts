/** Payload shapes of the /api/v1 surface, mirrored one-to-one. */

export type Rating = "positive" | "negative";
export type ExampleRole = "positive" | "negative" | "excluded";

export interface DatasetSummary {
  dataset_id: string;
  n_records: number;
}

export interface RecordDoc {
  id: string;
  input: string;
  output: string;
}

export interface ExampleFunctionDoc {
  example_id: string;
  function_description: string;
  fragment: string;
  origin: [string, string] | null;
}

export interface CriterionDoc {
  criterion_id: string;
  name: string;
  description: string;
  positive_examples: ExampleFunctionDoc[];
  negative_examples: ExampleFunctionDoc[];
  excluded_examples: ExampleFunctionDoc[];
  warnings?: string[];
}

export interface AssessmentDoc {
  assessment_id: string;
  record_id: string;
  criterion_id: string;
  fragment: string;
  function_description: string;
  rating: Rating;
  excluded: boolean;
  analysis: string;
  span: [number, number] | null;
  span_ambiguous: boolean;
}

export interface EvaluationDoc {
  record_id: string;
  criterion_id: string;
  holistic_score: number | null;
  holistic_justification: string;
  keyphrase: string;
  assessments: AssessmentDoc[];
}

export interface MapPointDoc {
  function_ref: string;
  x: number;
  y: number;
  rating: Rating;
  is_example_overlay: boolean;
}

export interface OverlayPointDoc extends MapPointDoc {
  role: ExampleRole;
}

export interface BaseClusterDoc {
  base_id: string;
  members: string[];
  name: string;
  description: string;
  positive_count: number;
  negative_count: number;
}

export interface SuperClusterDoc {
  super_id: string;
  members: string[];
  name: string;
  description: string;
}

export interface HierarchyDoc {
  criterion_id: string;
  seed: number;
  min_cluster_size: number;
  points: MapPointDoc[];
  base_clusters: BaseClusterDoc[];
  super_clusters: SuperClusterDoc[];
  noise: string[];
}

export interface JobDoc {
  job_id: string;
  dataset_id: string;
  phase: "queued" | "evaluating" | "embedding" | "clustering" | "labeling" | "done" | "failed";
  progress: { completed: number; total: number };
  error: string | null;
  run_id: string | null;
}

export interface RunMeta {
  run_id: string;
  dataset_id: string;
  seed: number;
  template_version: string;
  created_at: string;
}

export interface ClusterFilterDoc {
  records: RecordDoc[];
  stats: {
    base_id: string;
    matching_record_count: number;
    mean_holistic_score: Record<string, number | null>;
    co_occurring: [string, number][];
  };
}

export interface ExampleMutation {
  add?: Array<
    | { role: ExampleRole; run_id: string; assessment_id: string }
    | { role: ExampleRole; function_description: string; fragment: string }
  >;
  remove?: string[];
}
