/** Bootstrap: wires the map, explore panel, detail view, and toolbar to the
 * service, keeping everything synchronized through one view store whose
 * state round-trips through the URL hash. */

import { ApiClient } from "./api.js";
import { renderAssessmentPanel, renderDetail } from "./detailView.js";
import { renderExplore } from "./explorePanel.js";
import { renderMap } from "./mapView.js";
import { decodeViewState, encodeViewState, ViewStore } from "./state.js";
import { CorrectionToolbar } from "./toolbar.js";
import type {
  AssessmentDoc,
  EvaluationDoc,
  HierarchyDoc,
  OverlayPointDoc,
  RecordDoc,
  RunMeta,
} from "./types.js";

interface AppData {
  run: RunMeta;
  records: Map<string, RecordDoc>;
  criterionNames: Map<string, string>;
  evaluations: EvaluationDoc[];
  assessments: Map<string, AssessmentDoc>;
  hierarchy: HierarchyDoc | null;
  overlay: OverlayPointDoc[];
}

async function loadRun(api: ApiClient, run: RunMeta, criterionId: string | null): Promise<AppData> {
  const [criteria, evaluations, dataset] = await Promise.all([
    api.listCriteria(),
    api.evaluations(run.run_id),
    api.getDataset(run.dataset_id),
  ]);
  const criterionNames = new Map(criteria.map((c) => [c.criterion_id, c.name]));
  const assessments = new Map<string, AssessmentDoc>();
  for (const evaluation of evaluations) {
    for (const assessment of evaluation.assessments) {
      assessments.set(assessment.assessment_id, assessment);
    }
  }
  const active = criterionId ?? evaluations[0]?.criterion_id ?? null;
  let hierarchy: HierarchyDoc | null = null;
  let overlay: OverlayPointDoc[] = [];
  if (active) {
    try {
      hierarchy = await api.hierarchy(run.run_id, active);
      overlay = await api.overlay(run.run_id, active);
    } catch {
      hierarchy = null; // evaluation-only runs have no map
    }
  }
  return {
    run,
    records: new Map(dataset.records.map((r) => [r.id, r])),
    criterionNames,
    evaluations,
    assessments,
    hierarchy,
    overlay,
  };
}

export async function bootstrap(root: HTMLElement, api = new ApiClient()): Promise<void> {
  const runs = await api.listRuns();
  if (runs.length === 0) {
    root.textContent = "No runs yet. Start one with the CLI or POST /api/v1/runs.";
    return;
  }
  const run = runs[runs.length - 1]!;

  const store = new ViewStore(decodeViewState(window.location.hash.slice(1)));
  let data = await loadRun(api, run, store.get().criterionId);
  if (!store.get().criterionId) {
    store.update({ criterionId: data.evaluations[0]?.criterion_id ?? null });
  }
  store.setKnownFunctionIds(data.hierarchy?.points.map((p) => p.function_ref) ?? []);

  root.innerHTML = `
    <div class="layout">
      <section class="panel">
        <div data-mount="explore"></div>
        <div data-mount="detail"></div>
        <div data-mount="assessment"></div>
      </section>
      <section class="map">
        <div class="controls" data-mount="controls"></div>
        <svg data-mount="map" width="800" height="600"></svg>
        <div data-mount="toolbar"></div>
        <div data-mount="toast" class="toast"></div>
      </section>
    </div>`;
  const mounts = {
    explore: root.querySelector<HTMLElement>('[data-mount="explore"]')!,
    detail: root.querySelector<HTMLElement>('[data-mount="detail"]')!,
    assessment: root.querySelector<HTMLElement>('[data-mount="assessment"]')!,
    controls: root.querySelector<HTMLElement>('[data-mount="controls"]')!,
    map: root.querySelector<SVGSVGElement>('svg[data-mount="map"]')!,
    toolbar: root.querySelector<HTMLElement>('[data-mount="toolbar"]')!,
    toast: root.querySelector<HTMLElement>('[data-mount="toast"]')!,
  };

  const toast = (message: string) => {
    mounts.toast.textContent = message;
    mounts.toast.setAttribute("data-visible", "true");
    setTimeout(() => mounts.toast.removeAttribute("data-visible"), 4000);
  };

  const toolbar = new CorrectionToolbar(mounts.toolbar, api, {
    onToast: toast,
    onBasketConsumed: () => store.clearBasket(),
    onCriterionUpdated: () => void refreshOverlay(),
    onRunCompleted: () => toast("Re-run finished; reload to view the new evaluation."),
  });

  async function refreshOverlay(): Promise<void> {
    const criterionId = store.get().criterionId;
    if (!criterionId || !data.hierarchy) return;
    try {
      data.overlay = await api.overlay(data.run.run_id, criterionId);
    } catch {
      data.overlay = [];
    }
    render(store.get());
  }

  function renderControls(): void {
    mounts.controls.textContent = "";
    const toggles: Array<
      ["showSuperLabels" | "showBaseLabels" | "colorByRating" | "showExamples", string]
    > = [
      ["showSuperLabels", "Super labels"],
      ["showBaseLabels", "Base labels"],
      ["colorByRating", "Color by rating"],
      ["showExamples", "Show examples"],
    ];
    for (const [key, label] of toggles) {
      const wrapper = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = Boolean(store.get()[key]);
      box.setAttribute("data-toggle", key);
      box.addEventListener("change", () => store.update({ [key]: box.checked }));
      wrapper.append(box, document.createTextNode(` ${label}`));
      mounts.controls.appendChild(wrapper);
    }
    const back = document.createElement("button");
    back.textContent = "Zoom out";
    back.setAttribute("data-role", "zoom-out");
    back.addEventListener("click", () => store.zoomOut());
    mounts.controls.appendChild(back);
  }

  function render(state = store.get()): void {
    window.location.hash = encodeViewState(state);
    renderControls();
    renderMap(
      mounts.map,
      data.hierarchy,
      data.overlay,
      state,
      new Map(
        [...data.assessments.values()].map((a) => [a.assessment_id, a.function_description]),
      ),
      {
        onEnterSuper: (id) => store.enterSuper(id),
        onEnterBase: (id) => store.enterBase(id),
        onSelectFunction: (ref, addToBasket) =>
          addToBasket ? store.toggleBasket(ref) : store.selectFunction(ref),
      },
    );
    renderExplore(mounts.explore, data.hierarchy, data.assessments, state, {
      onEnterSuper: (id) => store.enterSuper(id),
      onEnterBase: (id) => store.enterBase(id),
      onSelectFunction: (ref) => store.selectFunction(ref),
      onToggleBasket: (ref) => store.toggleBasket(ref),
    });

    const selected = state.selectedFunctionId
      ? data.assessments.get(state.selectedFunctionId)
      : undefined;
    if (selected) {
      const record = data.records.get(selected.record_id);
      if (record) {
        renderDetail(
          mounts.detail,
          record,
          data.evaluations.filter((e) => e.record_id === record.id),
          state.criterionId ?? selected.criterion_id,
          data.criterionNames,
          {
            onSwitchCriterion: (criterionId) => switchCriterion(criterionId),
            onSelectAssessment: (assessmentId) => store.selectFunction(assessmentId),
          },
        );
      }
      renderAssessmentPanel(mounts.assessment, selected);
    } else {
      mounts.detail.textContent = "";
      mounts.assessment.textContent = "";
    }

    toolbar.render({
      runId: data.run.run_id,
      datasetId: data.run.dataset_id,
      criterionId: state.criterionId ?? "",
      basket: state.basket,
    });
  }

  async function switchCriterion(criterionId: string): Promise<void> {
    store.update({
      criterionId,
      zoom: "super",
      selectedSuperId: null,
      selectedBaseId: null,
    });
    data = await loadRun(api, data.run, criterionId);
    store.setKnownFunctionIds(data.hierarchy?.points.map((p) => p.function_ref) ?? []);
    render(store.get());
  }

  store.subscribe(render);
  render(store.get());
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) {
    void bootstrap(root);
  }
}
