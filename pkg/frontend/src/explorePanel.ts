/** The Explore tab: the cluster hierarchy as a synchronized list.
 *
 * Shows super clusters when nothing is selected, the selected super's base
 * clusters, or the selected base's functions (description, fragment,
 * rating, justification). Noise points appear under an "Unclustered"
 * pseudo-group. Clicking an item drives the same view state as the map.
 */

import type { ViewState } from "./state.js";
import type { AssessmentDoc, HierarchyDoc } from "./types.js";

export interface ExploreHandlers {
  onEnterSuper?(superId: string): void;
  onEnterBase?(baseId: string): void;
  onSelectFunction?(functionRef: string): void;
  onToggleBasket?(functionRef: string): void;
}

export const UNCLUSTERED_ID = "unclustered";

function countsBadge(positive: number, negative: number): HTMLElement {
  const badge = document.createElement("span");
  badge.className = "counts";
  badge.setAttribute("data-role", "counts");
  badge.textContent = `${positive}+ / ${negative}-`;
  return badge;
}

export function renderExplore(
  container: HTMLElement,
  hierarchy: HierarchyDoc | null,
  assessments: Map<string, AssessmentDoc>,
  state: ViewState,
  handlers: ExploreHandlers = {},
): void {
  container.textContent = "";
  if (!hierarchy) {
    const empty = document.createElement("p");
    empty.setAttribute("data-role", "empty-message");
    empty.textContent = "Run an evaluation to explore its functions.";
    container.appendChild(empty);
    return;
  }

  const list = document.createElement("ul");
  list.className = "explore-list";

  if (state.zoom === "super") {
    for (const superCluster of hierarchy.super_clusters) {
      const item = document.createElement("li");
      item.setAttribute("data-role", "super-item");
      item.setAttribute("data-cluster", superCluster.super_id);
      const title = document.createElement("strong");
      title.textContent = superCluster.name;
      item.appendChild(title);
      const bases = hierarchy.base_clusters.filter((b) =>
        superCluster.members.includes(b.base_id),
      );
      item.appendChild(
        countsBadge(
          bases.reduce((n, b) => n + b.positive_count, 0),
          bases.reduce((n, b) => n + b.negative_count, 0),
        ),
      );
      const description = document.createElement("p");
      description.textContent = superCluster.description;
      item.appendChild(description);
      item.addEventListener("click", () => handlers.onEnterSuper?.(superCluster.super_id));
      list.appendChild(item);
    }
    if (hierarchy.noise.length) {
      const item = document.createElement("li");
      item.setAttribute("data-role", "unclustered-item");
      item.textContent = `Unclustered (${hierarchy.noise.length})`;
      item.addEventListener("click", () => handlers.onEnterBase?.(UNCLUSTERED_ID));
      list.appendChild(item);
    }
  } else if (state.zoom === "base") {
    const superCluster = hierarchy.super_clusters.find(
      (s) => s.super_id === state.selectedSuperId,
    );
    const bases = hierarchy.base_clusters.filter(
      (b) => !superCluster || superCluster.members.includes(b.base_id),
    );
    for (const base of bases) {
      const item = document.createElement("li");
      item.setAttribute("data-role", "base-item");
      item.setAttribute("data-cluster", base.base_id);
      const title = document.createElement("strong");
      title.textContent = base.name;
      item.appendChild(title);
      item.appendChild(countsBadge(base.positive_count, base.negative_count));
      const description = document.createElement("p");
      description.textContent = base.description;
      item.appendChild(description);
      item.addEventListener("click", () => handlers.onEnterBase?.(base.base_id));
      list.appendChild(item);
    }
  } else {
    const members =
      state.selectedBaseId === UNCLUSTERED_ID
        ? hierarchy.noise
        : hierarchy.base_clusters.find((b) => b.base_id === state.selectedBaseId)?.members ?? [];
    for (const ref of members) {
      const assessment = assessments.get(ref);
      const item = document.createElement("li");
      item.setAttribute("data-role", "function-item");
      item.setAttribute("data-ref", ref);
      if (state.basket.includes(ref)) item.setAttribute("data-in-basket", "true");

      const checkbox = document.createElement("input");
      checkbox.type = "checkbox";
      checkbox.checked = state.basket.includes(ref);
      checkbox.setAttribute("data-role", "basket-toggle");
      checkbox.addEventListener("click", (event) => {
        event.stopPropagation();
        handlers.onToggleBasket?.(ref);
      });
      item.appendChild(checkbox);

      const title = document.createElement("strong");
      title.textContent = assessment?.function_description ?? ref;
      item.appendChild(title);
      if (assessment) {
        const rating = document.createElement("span");
        rating.setAttribute("data-role", "rating");
        rating.textContent = assessment.excluded ? "excluded" : assessment.rating;
        item.appendChild(rating);
        const fragment = document.createElement("p");
        fragment.className = "fragment";
        fragment.textContent = `"${assessment.fragment}"`;
        item.appendChild(fragment);
        const analysis = document.createElement("p");
        analysis.className = "analysis";
        analysis.textContent = assessment.analysis;
        item.appendChild(analysis);
      }
      item.addEventListener("click", () => handlers.onSelectFunction?.(ref));
      list.appendChild(item);
    }
  }
  container.appendChild(list);
}
