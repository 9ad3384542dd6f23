import { beforeEach, describe, expect, it } from "vitest";

import { renderMap } from "../src/mapView.js";
import { initialViewState, type ViewState } from "../src/state.js";
import { buildFixture } from "./fixtureServer.js";

function svgHost(): SVGSVGElement {
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("width", "800");
  svg.setAttribute("height", "600");
  document.body.appendChild(svg);
  return svg;
}

const fixture = buildFixture();
const descriptions = new Map(
  fixture.assessments.map((a) => [a.assessment_id, a.function_description]),
);

function render(svg: SVGSVGElement, state: Partial<ViewState>, overlay = fixture.overlay) {
  renderMap(svg, fixture.hierarchy, overlay, { ...initialViewState, ...state }, descriptions);
}

describe("map rendering", () => {
  let svg: SVGSVGElement;

  beforeEach(() => {
    document.body.textContent = "";
    svg = svgHost();
  });

  it("draws every map point exactly once", () => {
    render(svg, {});
    expect(svg.querySelectorAll('[data-role="point"]').length).toBe(
      fixture.hierarchy.points.length,
    );
  });

  it("shows the two super labels at super zoom", () => {
    render(svg, { zoom: "super" });
    const labels = [...svg.querySelectorAll('[data-role="super-label"]')];
    expect(labels.length).toBe(2);
    expect(labels.map((l) => l.textContent)).toEqual(
      expect.arrayContaining(["Implicit wrongness", "Explicit devices"]),
    );
    expect(svg.querySelectorAll('[data-role="base-label"]').length).toBe(0);
  });

  it("clicking through a super cluster shows its base labels", () => {
    render(svg, { zoom: "base", selectedSuperId: "sc-01" });
    const labels = [...svg.querySelectorAll('[data-role="base-label"]')];
    expect(labels.map((l) => l.getAttribute("data-cluster")).sort()).toEqual(
      ["bc-01", "bc-03"],
    );
    expect(svg.querySelectorAll('[data-role="super-label"]').length).toBe(0);
  });

  it("renders dots for positive and crosses for negative ratings", () => {
    render(svg, {});
    for (const point of fixture.hierarchy.points) {
      const node = svg.querySelector(`[data-ref="${point.function_ref}"]`)!;
      expect(node.getAttribute("data-glyph")).toBe(
        point.rating === "positive" ? "dot" : "cross",
      );
    }
  });

  it("color-by-rating switches from the cluster palette to the rating palette", () => {
    render(svg, { colorByRating: false });
    const byCluster = svg
      .querySelector('[data-ref="as-r1-c1-001"]')!
      .getAttribute("fill");
    render(svg, { colorByRating: true });
    const positive = svg.querySelector('[data-ref="as-r1-c1-001"]')!.getAttribute("fill");
    const negativeCross = svg.querySelector('[data-ref="as-r1-c1-003"]')!;
    expect(positive).toBe("#2e9e4f");
    expect(negativeCross.getAttribute("stroke")).toBe("#e08a1e");
    expect(byCluster).not.toBe(positive);
  });

  it("draws overlay squares only when show-examples is on", () => {
    render(svg, { showExamples: false });
    expect(svg.querySelectorAll('[data-role="overlay"]').length).toBe(0);
    render(svg, { showExamples: true });
    const squares = [...svg.querySelectorAll('[data-role="overlay"]')];
    expect(squares.length).toBe(2);
    expect(squares.every((s) => s.tagName.toLowerCase() === "rect")).toBe(true);
    expect(squares.map((s) => s.getAttribute("data-example-role")).sort()).toEqual(
      ["excluded", "positive"],
    );
  });

  it("noise points render uncolored (gray)", () => {
    render(svg, {});
    const noise = svg.querySelector('[data-ref="as-fill-4"]')!;
    expect(noise.getAttribute("fill")).toBe("#b5b5b5");
  });

  it("draws cluster hulls with labels attached to clusters", () => {
    render(svg, { zoom: "super" });
    const hulls = [...svg.querySelectorAll('[data-role="hull"]')];
    expect(hulls.map((h) => h.getAttribute("data-cluster")).sort()).toEqual(
      ["sc-01", "sc-02"],
    );
  });

  it("hover tooltips carry the function description", () => {
    render(svg, {});
    const node = svg.querySelector('[data-ref="as-r1-c1-001"]')!;
    expect(node.querySelector("title")!.textContent).toBe("Implied agency of the setting");
  });

  it("degrades to a message on an empty hierarchy", () => {
    renderMap(svg, { ...fixture.hierarchy, points: [], base_clusters: [], super_clusters: [], noise: [] },
      [], initialViewState, descriptions);
    expect(svg.querySelector('[data-role="empty-message"]')).not.toBeNull();
    renderMap(svg, null, [], initialViewState, descriptions);
    expect(svg.querySelector('[data-role="empty-message"]')).not.toBeNull();
  });

  it("marks selected and basketed points", () => {
    render(svg, { selectedFunctionId: "as-r1-c1-001", basket: ["as-r2-c1-001"] });
    expect(
      svg.querySelector('[data-ref="as-r1-c1-001"]')!.getAttribute("data-selected"),
    ).toBe("true");
    expect(
      svg.querySelector('[data-ref="as-r2-c1-001"]')!.getAttribute("data-selected"),
    ).toBe("true");
    expect(svg.querySelector('[data-ref="as-r2-c1-002"]')!.hasAttribute("data-selected")).toBe(false);
  });

  it("wheel zooms the viewBox and dragging pans it", () => {
    render(svg, {});
    const before = svg.getAttribute("viewBox")!;
    svg.dispatchEvent(new WheelEvent("wheel", { deltaY: -120, bubbles: true, cancelable: true }));
    const zoomed = svg.getAttribute("viewBox")!;
    expect(zoomed).not.toBe(before);
    const [, , w0] = before.split(/\s+/).map(Number);
    const [, , w1] = zoomed.split(/\s+/).map(Number);
    expect(w1!).toBeLessThan(w0!); // scrolled in

    svg.dispatchEvent(new MouseEvent("mousedown", { clientX: 100, clientY: 100 }));
    svg.dispatchEvent(new MouseEvent("mousemove", { clientX: 140, clientY: 120 }));
    svg.dispatchEvent(new MouseEvent("mouseup"));
    const panned = svg.getAttribute("viewBox")!;
    expect(panned).not.toBe(zoomed);
  });

  it("click handlers fire for labels and points", () => {
    const seen: string[] = [];
    renderMap(svg, fixture.hierarchy, [], { ...initialViewState, zoom: "super" }, descriptions, {
      onEnterSuper: (id) => seen.push(`super:${id}`),
      onSelectFunction: (ref) => seen.push(`fn:${ref}`),
    });
    (svg.querySelector('[data-cluster="sc-01"][data-role="super-label"]') as SVGElement).dispatchEvent(
      new MouseEvent("click", { bubbles: true }),
    );
    (svg.querySelector('[data-ref="as-r1-c1-001"]') as SVGElement).dispatchEvent(
      new MouseEvent("click", { bubbles: true }),
    );
    expect(seen).toEqual(["super:sc-01", "fn:as-r1-c1-001"]);
  });
});
