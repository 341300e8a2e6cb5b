// Entry point: wire the app to the DOM shell in index.html.

import { ReviewApi } from "./api.js";
import { ReviewApp } from "./app.js";
import { LocalStorageQueue } from "./queue.js";

function requireEl(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id} in the page shell`);
  return el;
}

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "";
const reviewer = params.get("reviewer") ?? "reviewer";

const api = new ReviewApi(baseUrl, reviewer);
const app = new ReviewApp(
  api,
  {
    card: requireEl("card"),
    tallies: requireEl("tallies"),
    banner: requireEl("banner"),
    position: requireEl("position"),
    modifyPanel: requireEl("modify-panel"),
  },
  `s-${Date.now().toString(36)}-${Math.random().toString(36).slice(2, 8)}`,
  new LocalStorageQueue(),
);

app.attachKeyboard();
app.attachConnectivity();
void app.start();
