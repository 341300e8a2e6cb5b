// Card rendering: overlays land on their pixels and no field is reworded.

import { describe, expect, it } from "vitest";

import { renderItemCard } from "../src/render.js";
import type { QuestionItem } from "../src/types.js";

function item(overrides: Partial<QuestionItem> = {}): QuestionItem {
  return {
    id: "q-1",
    task: "depth_order",
    prompt: "Which object is closer to the camera, the dog (red) or the car (blue)?",
    choices: ["dog", "car"],
    answer_index: 0,
    overlays: [
      { bbox2d: [12, 34, 56, 78], color: "red" },
      { bbox2d: [100, 5, 40, 18], color: "blue" },
    ],
    status: "pending",
    edited_answer: null,
    source: "omni3d-like",
    ...overrides,
  };
}

describe("renderItemCard", () => {
  it("draws one box per overlay in the overlay's color", () => {
    const host = document.createElement("div");
    renderItemCard(item(), host);
    const boxes = [...host.querySelectorAll<HTMLElement>(".overlay-box")];
    expect(boxes).toHaveLength(2);
    expect(boxes.map((b) => b.dataset.color)).toEqual(["red", "blue"]);
  });

  it("positions overlay boxes within one device pixel at 1:1 zoom", () => {
    const host = document.createElement("div");
    renderItemCard(item(), host);
    const box = host.querySelector<HTMLElement>(".overlay-box")!;
    const px = (value: string) => Number.parseFloat(value);
    expect(Math.abs(px(box.style.left) - 12)).toBeLessThanOrEqual(1);
    expect(Math.abs(px(box.style.top) - 34)).toBeLessThanOrEqual(1);
    expect(Math.abs(px(box.style.width) - 56)).toBeLessThanOrEqual(1);
    expect(Math.abs(px(box.style.height) - 78)).toBeLessThanOrEqual(1);
  });

  it("renders image only when there are no overlays", () => {
    const host = document.createElement("div");
    renderItemCard(item({ overlays: [], image_url: "http://img.local/x.png" }), host);
    expect(host.querySelectorAll(".overlay-box")).toHaveLength(0);
    expect(host.querySelector("img")).not.toBeNull();
  });

  it("shows a placeholder when the image is missing but keeps the item reviewable", () => {
    const host = document.createElement("div");
    renderItemCard(item({ image_url: null }), host);
    expect(host.querySelector(".image-placeholder")).not.toBeNull();
    expect(host.querySelector(".prompt")).not.toBeNull();
  });

  it("never rewrites fetched content: prompt and choices byte-match", () => {
    const fixture = item({ prompt: "Exact   prompt — with spacing!", choices: ["Alpha (x)", 42] });
    const host = document.createElement("div");
    renderItemCard(fixture, host);
    expect(host.querySelector(".prompt")!.textContent).toBe(fixture.prompt);
    const rendered = [...host.querySelectorAll(".choice")].map((c) => c.textContent);
    expect(rendered).toEqual(["(A) Alpha (x)", "(B) 42"]);
  });

  it("highlights the generated answer for the reviewer", () => {
    const host = document.createElement("div");
    renderItemCard(item({ answer_index: 1 }), host);
    const highlighted = host.querySelector<HTMLElement>(".choice.correct")!;
    expect(highlighted.dataset.index).toBe("1");
  });
});
