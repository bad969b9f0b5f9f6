import { ApiClient } from "./api.js";
import { Controller } from "./controller.js";
import { render } from "./render.js";

function annotatorId(): string {
  const params = new URLSearchParams(window.location.search);
  const fromUrl = params.get("annotator");
  if (fromUrl) {
    window.localStorage.setItem("annotator", fromUrl);
    return fromUrl;
  }
  let stored = window.localStorage.getItem("annotator");
  if (!stored) {
    stored = `anon-${Math.random().toString(36).slice(2, 8)}`;
    window.localStorage.setItem("annotator", stored);
  }
  return stored;
}

const root = document.getElementById("app");
if (root) {
  const ctrl = new Controller(new ApiClient(), annotatorId());
  ctrl.onChange(() => render(root, ctrl));
  void ctrl.loadNext();
}
