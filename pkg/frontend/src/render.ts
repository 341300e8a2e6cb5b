// Item card rendering: image + colored overlay boxes + prompt + choices.
//
// Displayed text is taken verbatim from the fetched item; nothing is
// reworded or truncated. Overlay boxes are absolutely positioned in image
// pixel coordinates inside a 1:1 container, so at 1:1 zoom a box edge sits
// on the annotated pixel.

import type { QuestionItem } from "./types.js";

export const CHOICE_PREFIX = "ABCDEFGHIJ";

export function renderItemCard(item: QuestionItem, container: HTMLElement): HTMLElement {
  container.textContent = "";
  const card = document.createElement("article");
  card.className = "item-card";
  card.dataset.itemId = item.id;

  card.appendChild(renderImagePane(item));

  const prompt = document.createElement("p");
  prompt.className = "prompt";
  prompt.textContent = item.prompt;
  card.appendChild(prompt);

  const list = document.createElement("ol");
  list.className = "choices";
  item.choices.forEach((choice, index) => {
    const entry = document.createElement("li");
    entry.className = "choice";
    entry.dataset.index = String(index);
    entry.textContent = `(${CHOICE_PREFIX[index] ?? "?"}) ${String(choice)}`;
    if (index === item.answer_index) {
      entry.classList.add("correct"); // reviewer sees the generated answer highlighted
    }
    list.appendChild(entry);
  });
  card.appendChild(list);

  const meta = document.createElement("footer");
  meta.className = "meta";
  meta.textContent = `${item.task} · ${item.source ?? "unknown source"} · ${item.id}`;
  card.appendChild(meta);

  container.appendChild(card);
  return card;
}

function renderImagePane(item: QuestionItem): HTMLElement {
  const pane = document.createElement("div");
  pane.className = "image-pane";
  pane.style.position = "relative";

  if (item.image_url) {
    const img = document.createElement("img");
    img.src = item.image_url;
    img.alt = item.id;
    img.addEventListener("error", () => {
      img.replaceWith(placeholder());
    });
    pane.appendChild(img);
  } else {
    pane.appendChild(placeholder());
  }

  for (const overlay of item.overlays) {
    const [x, y, w, h] = overlay.bbox2d;
    const box = document.createElement("div");
    box.className = "overlay-box";
    box.style.position = "absolute";
    box.style.left = `${x}px`;
    box.style.top = `${y}px`;
    box.style.width = `${w}px`;
    box.style.height = `${h}px`;
    box.style.border = `2px solid ${overlay.color}`;
    box.dataset.color = overlay.color;
    pane.appendChild(box);
  }
  return pane;
}

function placeholder(): HTMLElement {
  const div = document.createElement("div");
  div.className = "image-placeholder";
  div.textContent = "image unavailable — metadata below is still reviewable";
  return div;
}
