/** Evaluation details for one record: the output text with assessed
 * fragments highlighted (green positive, orange negative), a criterion
 * switcher, the holistic score as a percentage, and a justification panel
 * for the clicked fragment. Fragments whose spans could not be located are
 * listed below the text instead of highlighted. */

import type { AssessmentDoc, EvaluationDoc, RecordDoc } from "./types.js";

export interface DetailHandlers {
  onSwitchCriterion?(criterionId: string): void;
  onSelectAssessment?(assessmentId: string): void;
}

function highlightClass(assessment: AssessmentDoc): string {
  if (assessment.excluded) return "hl hl-excluded";
  return assessment.rating === "positive" ? "hl hl-positive" : "hl hl-negative";
}

/** Non-overlapping render order: earlier starts win, ties prefer longer. */
function resolvedInRenderOrder(assessments: AssessmentDoc[]): AssessmentDoc[] {
  const spanned = assessments.filter((a) => a.span !== null);
  spanned.sort((a, b) => a.span![0] - b.span![0] || b.span![1] - a.span![1]);
  const chosen: AssessmentDoc[] = [];
  let cursor = 0;
  for (const a of spanned) {
    if (a.span![0] >= cursor) {
      chosen.push(a);
      cursor = a.span![1];
    }
  }
  return chosen;
}

export function renderDetail(
  container: HTMLElement,
  record: RecordDoc,
  evaluations: EvaluationDoc[],
  activeCriterionId: string,
  criterionNames: Map<string, string>,
  handlers: DetailHandlers = {},
): void {
  container.textContent = "";
  const evaluation = evaluations.find((e) => e.criterion_id === activeCriterionId) ?? null;

  const header = document.createElement("div");
  header.className = "detail-header";
  const title = document.createElement("h3");
  title.textContent = record.id;
  header.appendChild(title);

  const switcher = document.createElement("select");
  switcher.setAttribute("data-role", "criterion-switcher");
  for (const e of evaluations) {
    const option = document.createElement("option");
    option.value = e.criterion_id;
    option.textContent = criterionNames.get(e.criterion_id) ?? e.criterion_id;
    option.selected = e.criterion_id === activeCriterionId;
    switcher.appendChild(option);
  }
  switcher.addEventListener("change", () => handlers.onSwitchCriterion?.(switcher.value));
  header.appendChild(switcher);
  container.appendChild(header);

  const input = document.createElement("p");
  input.className = "detail-input";
  input.textContent = record.input;
  container.appendChild(input);

  const body = document.createElement("div");
  body.className = "detail-output";
  body.setAttribute("data-role", "output-text");

  const assessments = evaluation?.assessments ?? [];
  const renderable = resolvedInRenderOrder(assessments);
  let cursor = 0;
  for (const assessment of renderable) {
    const [start, end] = assessment.span!;
    if (start > cursor) {
      body.appendChild(document.createTextNode(record.output.slice(cursor, start)));
    }
    const mark = document.createElement("mark");
    mark.className = highlightClass(assessment);
    mark.setAttribute("data-role", "highlight");
    mark.setAttribute("data-assessment", assessment.assessment_id);
    mark.setAttribute("data-rating", assessment.rating);
    mark.textContent = record.output.slice(start, end);
    mark.addEventListener("click", () => handlers.onSelectAssessment?.(assessment.assessment_id));
    body.appendChild(mark);
    cursor = end;
  }
  if (cursor < record.output.length) {
    body.appendChild(document.createTextNode(record.output.slice(cursor)));
  }
  container.appendChild(body);

  const unresolved = assessments.filter((a) => a.span === null);
  if (unresolved.length) {
    const section = document.createElement("div");
    section.className = "detail-unresolved";
    const caption = document.createElement("p");
    caption.textContent = "Assessed but not located in the output:";
    section.appendChild(caption);
    const list = document.createElement("ul");
    for (const assessment of unresolved) {
      const item = document.createElement("li");
      item.setAttribute("data-role", "unresolved");
      item.setAttribute("data-assessment", assessment.assessment_id);
      item.textContent = `${assessment.function_description} — "${assessment.fragment}"`;
      item.addEventListener("click", () => handlers.onSelectAssessment?.(assessment.assessment_id));
      list.appendChild(item);
    }
    section.appendChild(list);
    container.appendChild(section);
  }

  const footer = document.createElement("div");
  footer.className = "detail-footer";
  const score = document.createElement("p");
  score.setAttribute("data-role", "holistic-score");
  score.textContent =
    evaluation && evaluation.holistic_score !== null
      ? `Holistic score: ${Math.round(evaluation.holistic_score * 100)}%`
      : "Holistic score: —";
  footer.appendChild(score);
  if (evaluation?.holistic_justification) {
    const justification = document.createElement("p");
    justification.setAttribute("data-role", "holistic-justification");
    justification.textContent = evaluation.holistic_justification;
    footer.appendChild(justification);
  }
  container.appendChild(footer);
}

/** The per-fragment panel shown when a highlight is clicked. */
export function renderAssessmentPanel(container: HTMLElement, assessment: AssessmentDoc): void {
  container.textContent = "";
  container.setAttribute("data-role", "assessment-panel");

  const name = document.createElement("h4");
  name.setAttribute("data-role", "function-description");
  name.textContent = assessment.function_description;
  container.appendChild(name);

  const rating = document.createElement("p");
  rating.setAttribute("data-role", "rating");
  rating.textContent = assessment.excluded
    ? `excluded (${assessment.rating})`
    : assessment.rating;
  container.appendChild(rating);

  const analysis = document.createElement("p");
  analysis.setAttribute("data-role", "analysis");
  analysis.textContent = assessment.analysis;
  container.appendChild(analysis);
}
