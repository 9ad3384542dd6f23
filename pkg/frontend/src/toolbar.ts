/** Floating correction toolbar over the selection basket.
 *
 * Adds the collected functions to one of the criterion's example sets via
 * the API, and re-runs the evaluation (queuing a job and polling it). API
 * failures surface as a toast; the basket is never cleared on failure.
 */

import { ApiClient, ApiError } from "./api.js";
import type { ExampleRole, JobDoc } from "./types.js";

export interface ToolbarContext {
  runId: string;
  datasetId: string;
  criterionId: string;
  basket: string[];
}

export interface ToolbarCallbacks {
  onBasketConsumed?(): void;
  onCriterionUpdated?(): void;
  onRunCompleted?(runId: string): void;
  onToast?(message: string): void;
}

export class CorrectionToolbar {
  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private callbacks: ToolbarCallbacks = {},
    private pollIntervalMs = 400,
  ) {}

  render(context: ToolbarContext): void {
    this.root.textContent = "";
    this.root.className = "toolbar";
    if (context.basket.length === 0) {
      this.root.setAttribute("data-empty", "true");
      return;
    }
    this.root.removeAttribute("data-empty");

    const count = document.createElement("span");
    count.setAttribute("data-role", "basket-count");
    count.textContent = `${context.basket.length} selected`;
    this.root.appendChild(count);

    for (const role of ["positive", "negative", "excluded"] as ExampleRole[]) {
      const button = document.createElement("button");
      button.setAttribute("data-role", `add-${role}`);
      button.textContent = `Add as ${role}`;
      button.addEventListener("click", () => void this.addExamples(context, role));
      this.root.appendChild(button);
    }

    const rerun = document.createElement("button");
    rerun.setAttribute("data-role", "rerun");
    rerun.textContent = "Re-run evaluation";
    rerun.addEventListener("click", () => void this.rerun(context));
    this.root.appendChild(rerun);
  }

  async addExamples(context: ToolbarContext, role: ExampleRole): Promise<void> {
    try {
      await this.api.mutateExamples(context.criterionId, {
        add: context.basket.map((assessmentId) => ({
          role,
          run_id: context.runId,
          assessment_id: assessmentId,
        })),
      });
      this.callbacks.onCriterionUpdated?.();
      this.callbacks.onBasketConsumed?.();
      this.callbacks.onToast?.(`Added ${context.basket.length} example(s) as ${role}.`);
    } catch (error) {
      // basket intentionally left intact so the user can retry
      const message =
        error instanceof ApiError
          ? `Could not update example sets (${error.status}): ${error.message}`
          : `Could not update example sets: ${String(error)}`;
      this.callbacks.onToast?.(message);
    }
  }

  async rerun(context: ToolbarContext): Promise<JobDoc | null> {
    try {
      const { job_id } = await this.api.startRun({ dataset_id: context.datasetId });
      const job = await this.pollJob(job_id);
      if (job.phase === "done" && job.run_id) {
        this.callbacks.onRunCompleted?.(job.run_id);
      } else if (job.phase === "failed") {
        this.callbacks.onToast?.(`Evaluation run failed: ${job.error ?? "unknown error"}`);
      }
      return job;
    } catch (error) {
      const message =
        error instanceof ApiError
          ? `Could not start the run (${error.status}): ${error.message}`
          : `Could not start the run: ${String(error)}`;
      this.callbacks.onToast?.(message);
      return null;
    }
  }

  private async pollJob(jobId: string): Promise<JobDoc> {
    let delay = this.pollIntervalMs;
    for (;;) {
      const job = await this.api.jobStatus(jobId);
      if (job.phase === "done" || job.phase === "failed") return job;
      await new Promise((resolve) => setTimeout(resolve, delay));
      delay = Math.min(delay * 1.5, 5000); // fixed interval with backoff cap
    }
  }
}
