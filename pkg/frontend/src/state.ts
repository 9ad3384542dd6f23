/** View state: what the map and panel show, deep-linkable via the URL hash.
 *
 * Zoom follows the click-through ladder super -> base -> function; the
 * selection basket only ever holds assessment ids present in the current
 * run's hierarchy.
 */

export type ZoomLevel = "super" | "base" | "function";

export interface ViewState {
  criterionId: string | null;
  zoom: ZoomLevel;
  selectedSuperId: string | null;
  selectedBaseId: string | null;
  selectedFunctionId: string | null;
  showSuperLabels: boolean;
  showBaseLabels: boolean;
  colorByRating: boolean;
  showExamples: boolean;
  basket: string[];
}

export const initialViewState: ViewState = {
  criterionId: null,
  zoom: "super",
  selectedSuperId: null,
  selectedBaseId: null,
  selectedFunctionId: null,
  showSuperLabels: true,
  showBaseLabels: false,
  colorByRating: false,
  showExamples: false,
  basket: [],
};

export type Listener = (state: ViewState) => void;

export class ViewStore {
  private state: ViewState;
  private listeners = new Set<Listener>();
  /** ids valid for basket membership (the current run's map points) */
  private knownFunctionIds = new Set<string>();

  constructor(state: ViewState = initialViewState) {
    this.state = { ...state };
  }

  get(): ViewState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  setKnownFunctionIds(ids: Iterable<string>): void {
    this.knownFunctionIds = new Set(ids);
    const basket = this.state.basket.filter((id) => this.knownFunctionIds.has(id));
    if (basket.length !== this.state.basket.length) this.update({ basket });
  }

  /** Click-through: a super cluster zooms to its base clusters. */
  enterSuper(superId: string): void {
    this.update({ zoom: "base", selectedSuperId: superId, selectedBaseId: null, selectedFunctionId: null });
  }

  /** Click-through: a base cluster zooms to its functions. */
  enterBase(baseId: string, superId?: string): void {
    this.update({
      zoom: "function",
      selectedSuperId: superId ?? this.state.selectedSuperId,
      selectedBaseId: baseId,
      selectedFunctionId: null,
    });
  }

  selectFunction(functionId: string | null): void {
    this.update({ selectedFunctionId: functionId });
  }

  zoomOut(): void {
    if (this.state.zoom === "function") {
      this.update({ zoom: "base", selectedBaseId: null, selectedFunctionId: null });
    } else if (this.state.zoom === "base") {
      this.update({ zoom: "super", selectedSuperId: null, selectedBaseId: null, selectedFunctionId: null });
    }
  }

  toggleBasket(functionId: string): void {
    if (!this.knownFunctionIds.has(functionId)) return;
    const basket = this.state.basket.includes(functionId)
      ? this.state.basket.filter((id) => id !== functionId)
      : [...this.state.basket, functionId];
    this.update({ basket });
  }

  clearBasket(): void {
    this.update({ basket: [] });
  }
}

const FLAG_KEYS = ["showSuperLabels", "showBaseLabels", "colorByRating", "showExamples"] as const;

export function encodeViewState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.criterionId) params.set("c", state.criterionId);
  params.set("z", state.zoom);
  if (state.selectedSuperId) params.set("s", state.selectedSuperId);
  if (state.selectedBaseId) params.set("b", state.selectedBaseId);
  if (state.selectedFunctionId) params.set("f", state.selectedFunctionId);
  const flags = FLAG_KEYS.map((key) => (state[key] ? "1" : "0")).join("");
  params.set("t", flags);
  if (state.basket.length) params.set("sel", state.basket.join(","));
  return params.toString();
}

export function decodeViewState(encoded: string): ViewState {
  const params = new URLSearchParams(encoded);
  const zoom = params.get("z");
  const flags = params.get("t") ?? "";
  const state: ViewState = {
    ...initialViewState,
    criterionId: params.get("c"),
    zoom: zoom === "base" || zoom === "function" ? zoom : "super",
    selectedSuperId: params.get("s"),
    selectedBaseId: params.get("b"),
    selectedFunctionId: params.get("f"),
    basket: params.get("sel")?.split(",").filter(Boolean) ?? [],
  };
  FLAG_KEYS.forEach((key, i) => {
    if (flags[i] === "0" || flags[i] === "1") state[key] = flags[i] === "1";
  });
  return state;
}
