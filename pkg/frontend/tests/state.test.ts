import { describe, expect, it } from "vitest";

import {
  decodeViewState,
  encodeViewState,
  initialViewState,
  ViewStore,
  type ViewState,
} from "../src/state.js";

describe("view store", () => {
  it("click-through follows super -> base -> function", () => {
    const store = new ViewStore();
    expect(store.get().zoom).toBe("super");
    store.enterSuper("sc-01");
    expect(store.get().zoom).toBe("base");
    expect(store.get().selectedSuperId).toBe("sc-01");
    store.enterBase("bc-02");
    expect(store.get().zoom).toBe("function");
    expect(store.get().selectedBaseId).toBe("bc-02");
    store.zoomOut();
    expect(store.get().zoom).toBe("base");
    store.zoomOut();
    expect(store.get().zoom).toBe("super");
    store.zoomOut(); // already at the top: no-op
    expect(store.get().zoom).toBe("super");
  });

  it("basket only accepts ids present in the current run", () => {
    const store = new ViewStore();
    store.setKnownFunctionIds(["a", "b"]);
    store.toggleBasket("a");
    store.toggleBasket("ghost");
    expect(store.get().basket).toEqual(["a"]);
    store.toggleBasket("a");
    expect(store.get().basket).toEqual([]);
  });

  it("loading a new run drops stale basket entries", () => {
    const store = new ViewStore();
    store.setKnownFunctionIds(["a", "b", "c"]);
    store.toggleBasket("a");
    store.toggleBasket("c");
    store.setKnownFunctionIds(["c", "d"]);
    expect(store.get().basket).toEqual(["c"]);
  });

  it("notifies subscribers on every update", () => {
    const store = new ViewStore();
    const seen: string[] = [];
    const unsubscribe = store.subscribe((state) => seen.push(state.zoom));
    store.enterSuper("sc-01");
    store.enterBase("bc-01");
    unsubscribe();
    store.zoomOut();
    expect(seen).toEqual(["base", "function"]);
  });
});

describe("URL round trip", () => {
  it("encodes and decodes every field", () => {
    const state: ViewState = {
      criterionId: "c-horror",
      zoom: "function",
      selectedSuperId: "sc-02",
      selectedBaseId: "bc-05",
      selectedFunctionId: "as-x",
      showSuperLabels: false,
      showBaseLabels: true,
      colorByRating: true,
      showExamples: true,
      basket: ["as-1", "as-2"],
    };
    expect(decodeViewState(encodeViewState(state))).toEqual(state);
  });

  it("decodes an empty hash to the initial state", () => {
    expect(decodeViewState("")).toEqual(initialViewState);
  });

  it("ignores malformed zoom values", () => {
    expect(decodeViewState("z=warp").zoom).toBe("super");
  });
});
